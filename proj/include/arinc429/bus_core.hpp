// bus_core.hpp -- the core top level: up to 16 Tx/Rx channel pairs behind a
// 9-bit CPU address space with data-width adaptation and cpu_wait modeling.
//
// Address decode: channel = addr[8:5], register offset = addr[4:0].
// Register map per channel block (offsets 0x0A-0x1F unmapped):
//   0x00 TX_CONTROL    rw   0x01 TX_STATUS     ro   0x02 TX_FIFO      wo
//   0x03 RX_CONTROL    rw   0x04 RX_STATUS     ro   0x05 RX_FIFO      ro
//   0x06 TX_FIFO_LEVEL rw   0x07 RX_FIFO_LEVEL rw
//   0x08 LABEL_INDEX   rw   0x09 LABEL_ENABLE  rw (bit 0)
//
// FIFO data ports move 32-bit words in ceil(32/width) beats when the bus is
// narrower than a word; beat 0 carries ARINC bits 1-8 (little-endian).
// wait_beats reports how many further beats the access still needs, which
// is what cpu_wait signals to the CPU. All other registers are 8-bit and
// single-beat at every width; reads zero-extend.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arinc429/channel.hpp"

namespace arinc429 {

struct BusConfig {
    unsigned cpu_data_width = 32;  // 8, 16 or 32
    unsigned num_channels = 1;     // 1..16 Tx/Rx pairs
};

enum class AccessKind : uint8_t { Read, Write };

struct BusTransaction {
    AccessKind kind = AccessKind::Read;
    uint16_t address = 0;  // cpu_add[8:0]
    uint32_t data = 0;     // low cpu_data_width bits are significant on writes
};

enum class AccessOutcome : uint8_t {
    Ok,
    UnmappedAddress,    // no register at the offset, or channel out of range
    WriteOnlyRead,      // read of a write-only port; data reads as 0
    ReadOnlyWrite,      // write to a read-only port; ignored
    FifoUnderflow,      // RX_FIFO read while empty; data reads as 0
    FifoOverflow,       // TX_FIFO write while full; word dropped
    ProtocolViolation,  // a pending multi-beat access was abandoned
};

struct AccessResult {
    std::optional<uint32_t> data;  // present on reads
    unsigned wait_beats = 0;       // beats still owed after this one
    AccessOutcome outcome = AccessOutcome::Ok;
};

enum class Register : uint8_t {
    TxControl,
    TxStatus,
    TxFifo,
    RxControl,
    RxStatus,
    RxFifo,
    TxFifoLevel,
    RxFifoLevel,
    LabelIndex,
    LabelEnable,
};

struct RegisterInfo {
    Register reg;
    bool readable;
    bool writable;
    const char* name;
};

// Fixed offset table; nullopt for unmapped offsets.
std::optional<RegisterInfo> register_map(uint8_t offset);

inline constexpr uint8_t kOffTxControl = 0x00;
inline constexpr uint8_t kOffTxStatus = 0x01;
inline constexpr uint8_t kOffTxFifo = 0x02;
inline constexpr uint8_t kOffRxControl = 0x03;
inline constexpr uint8_t kOffRxStatus = 0x04;
inline constexpr uint8_t kOffRxFifo = 0x05;
inline constexpr uint8_t kOffTxFifoLevel = 0x06;
inline constexpr uint8_t kOffRxFifoLevel = 0x07;
inline constexpr uint8_t kOffLabelIndex = 0x08;
inline constexpr uint8_t kOffLabelEnable = 0x09;

constexpr uint16_t make_address(unsigned channel, uint8_t offset) {
    return static_cast<uint16_t>((channel << 5) | offset);
}

struct InterruptState {
    bool int_out_rx = false;
    bool int_out_tx = false;
    bool int_out = false;

    friend bool operator==(const InterruptState&, const InterruptState&) = default;
};

class BusCore {
public:
    explicit BusCore(BusConfig config);  // throws on invalid width/channel count

    const BusConfig& config() const { return config_; }

    // One bus beat. Multi-beat FIFO accesses are continued by repeating the
    // same transaction; presenting a different kind/address first abandons
    // the pending access (the partial word is discarded) and the new access
    // proceeds with outcome ProtocolViolation.
    AccessResult cpu_access(const BusTransaction& txn);

    // Total beats a full access to this address needs at the configured
    // width (1 for plain registers).
    unsigned beats_for(uint16_t address) const;

    InterruptState aggregate_interrupts() const;

    struct TickEmission {
        unsigned channel = 0;
        TxChannel::Emission emission;
    };

    // Advances every Tx serializer, draining all spans schedulable at
    // now_ns. Time must be monotone across calls.
    std::vector<TickEmission> core_tick(int64_t now_ns);

    TxChannel& tx(unsigned channel) { return channels_[channel].tx; }
    RxChannel& rx(unsigned channel) { return channels_[channel].rx; }
    const TxChannel& tx(unsigned channel) const { return channels_[channel].tx; }
    const RxChannel& rx(unsigned channel) const { return channels_[channel].rx; }

    // Canonical dump of registers, fifo contents and label tables. Two
    // cores in the same state produce identical strings regardless of bus
    // width. Does not disturb sticky status bits.
    std::string state_snapshot() const;

private:
    struct ChannelBlock {
        TxChannel tx;
        RxChannel rx;
        uint8_t label_index = 0;
        uint8_t tx_level_reg = 0;  // 0 = never programmed (default level 256)
        uint8_t rx_level_reg = 0;
    };

    struct Partial {
        bool active = false;
        AccessKind kind = AccessKind::Read;
        uint16_t address = 0;
        unsigned beats_done = 0;
        uint32_t accum = 0;  // bytes assembled (write) or word being read out
    };

    AccessResult register_read(ChannelBlock& block, uint8_t offset);
    AccessResult register_write(ChannelBlock& block, uint8_t offset, uint32_t value);
    AccessResult fifo_port_access(ChannelBlock& block, const BusTransaction& txn, uint8_t offset);

    BusConfig config_;
    std::vector<ChannelBlock> channels_;
    Partial partial_;
};

}  // namespace arinc429
