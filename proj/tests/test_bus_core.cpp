#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "arinc429/bus_core.hpp"

using namespace arinc429;

namespace {

uint32_t width_mask(unsigned width) {
    return width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
}

// Full multi-beat write of a 32-bit value, little-endian beat order.
AccessOutcome bus_write(BusCore& core, uint16_t addr, uint32_t value) {
    const unsigned w = core.config().cpu_data_width;
    AccessOutcome last = AccessOutcome::Ok;
    for (unsigned beat = 0; beat < core.beats_for(addr); ++beat) {
        const AccessResult r =
            core.cpu_access({AccessKind::Write, addr, (value >> (beat * w)) & width_mask(w)});
        last = r.outcome;
    }
    return last;
}

uint32_t bus_read(BusCore& core, uint16_t addr) {
    const unsigned w = core.config().cpu_data_width;
    uint32_t out = 0;
    for (unsigned beat = 0; beat < core.beats_for(addr); ++beat) {
        const AccessResult r = core.cpu_access({AccessKind::Read, addr, 0});
        if (r.data) out |= (*r.data & width_mask(w)) << (beat * w);
    }
    return out;
}

void feed_rx_word(BusCore& core, unsigned channel, Arinc429Word w) {
    for (const Span& sp : modulate_word(w, BitRate::High)) {
        core.rx(channel).feed(sp.level, sp.duration_ns);
    }
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(BusCore(BusConfig{12, 1}), std::invalid_argument);
    CHECK_THROWS_AS(BusCore(BusConfig{32, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BusCore(BusConfig{32, 17}), std::invalid_argument);
    CHECK_NOTHROW(BusCore(BusConfig{8, 16}));
}

TEST_CASE("register map table") {
    const auto st = register_map(0x01);
    REQUIRE(st.has_value());
    CHECK(st->reg == Register::TxStatus);
    CHECK(st->readable);
    CHECK_FALSE(st->writable);
    CHECK(std::string(st->name) == "TX_STATUS");
    CHECK_FALSE(register_map(0x0A).has_value());
    CHECK_FALSE(register_map(0x1F).has_value());
    unsigned mapped = 0;
    for (unsigned off = 0; off < 32; ++off) {
        if (register_map(static_cast<uint8_t>(off))) mapped += 1;
    }
    CHECK(mapped == 10);
}

TEST_CASE("address decode: channel is bits 8..5, offset bits 4..0") {
    BusCore core(BusConfig{32, 16});
    CHECK(make_address(8, kOffTxFifo) == 0x102);
    core.tx(8).write_control(ctrl::kParityEnable);
    CHECK(bus_write(core, 0x102, 0x00000000u) == AccessOutcome::Ok);
    REQUIRE(core.tx(8).fifo().size() == 1);
    CHECK(core.tx(8).fifo().contents()[0].raw == 0x80000000u);
}

TEST_CASE("address-decode bijectivity over the 9-bit space") {
    BusCore core(BusConfig{32, 16});
    unsigned mapped = 0;
    for (uint16_t addr = 0; addr < 512; ++addr) {
        const unsigned channel = addr >> 5;
        const uint8_t offset = addr & 0x1F;
        CHECK(make_address(channel, offset) == addr);
        const AccessResult r = core.cpu_access({AccessKind::Read, addr, 0});
        const bool is_mapped = r.outcome != AccessOutcome::UnmappedAddress;
        CHECK(is_mapped == register_map(offset).has_value());
        if (is_mapped) mapped += 1;
    }
    CHECK(mapped == 16 * 10);
}

TEST_CASE("channel beyond num_channels is unmapped") {
    BusCore core(BusConfig{32, 1});
    const AccessResult r =
        core.cpu_access({AccessKind::Read, make_address(12, kOffTxControl), 0});
    CHECK(r.outcome == AccessOutcome::UnmappedAddress);
}

TEST_CASE("width 32: TX_FIFO write is a single beat") {
    BusCore core(BusConfig{32, 1});
    const AccessResult r = core.cpu_access({AccessKind::Write, kOffTxFifo, 0x89ABCDEFu});
    CHECK(r.wait_beats == 0);
    CHECK(r.outcome == AccessOutcome::Ok);
    REQUIRE(core.tx(0).fifo().size() == 1);
    CHECK(core.tx(0).fifo().contents()[0].raw == 0x89ABCDEFu);
}

TEST_CASE("width 8: RX_FIFO read takes four beats, little-endian") {
    BusCore core(BusConfig{8, 1});
    feed_rx_word(core, 0, Arinc429Word{0xA1B2C3D4u});
    BusTransaction txn{AccessKind::Read, make_address(0, kOffRxFifo), 0};
    const AccessResult b0 = core.cpu_access(txn);
    const AccessResult b1 = core.cpu_access(txn);
    const AccessResult b2 = core.cpu_access(txn);
    const AccessResult b3 = core.cpu_access(txn);
    CHECK(b0.wait_beats == 3);
    CHECK(b1.wait_beats == 2);
    CHECK(b2.wait_beats == 1);
    CHECK(b3.wait_beats == 0);
    CHECK(*b0.data == 0xD4);  // beat 0 carries ARINC bits 1-8
    CHECK(*b1.data == 0xC3);
    CHECK(*b2.data == 0xB2);
    CHECK(*b3.data == 0xA1);
    CHECK(core.rx(0).fifo().size() == 0);
}

TEST_CASE("width 16: FIFO ports take two beats") {
    BusCore core(BusConfig{16, 1});
    CHECK(core.beats_for(kOffTxFifo) == 2);
    const AccessResult b0 =
        core.cpu_access({AccessKind::Write, kOffTxFifo, 0x5678});
    CHECK(b0.wait_beats == 1);
    CHECK(core.tx(0).fifo().size() == 0);  // not visible yet
    const AccessResult b1 =
        core.cpu_access({AccessKind::Write, kOffTxFifo, 0x1234});
    CHECK(b1.wait_beats == 0);
    REQUIRE(core.tx(0).fifo().size() == 1);
    CHECK(core.tx(0).fifo().contents()[0].raw == 0x12345678u);
}

TEST_CASE("aborted multi-beat access discards the partial word") {
    BusCore core(BusConfig{8, 1});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xEF});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xCD});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xAB});
    // a different address before the final beat abandons the word
    const AccessResult r = core.cpu_access({AccessKind::Read, kOffTxControl, 0});
    CHECK(r.outcome == AccessOutcome::ProtocolViolation);
    CHECK(*r.data == 0);  // the interrupting access still executes
    CHECK(core.tx(0).fifo().size() == 0);
    // a fresh full sequence works
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xEF});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xCD});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0xAB});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0x89});
    REQUIRE(core.tx(0).fifo().size() == 1);
    CHECK(core.tx(0).fifo().contents()[0].raw == 0x89ABCDEFu);
}

TEST_CASE("kind switch mid-sequence abandons the pending access") {
    BusCore core(BusConfig{16, 1});
    feed_rx_word(core, 0, Arinc429Word{0x80000001u});
    core.cpu_access({AccessKind::Read, kOffRxFifo, 0});
    // the interrupting access's own error outcome wins over ProtocolViolation
    const AccessResult r = core.cpu_access({AccessKind::Write, kOffRxFifo, 0});
    CHECK(r.outcome == AccessOutcome::ReadOnlyWrite);
    // the popped word was consumed by the aborted read
    CHECK(core.rx(0).fifo().size() == 0);
    // a fresh read starts from beat 0 again
    const AccessResult b0 = core.cpu_access({AccessKind::Read, kOffRxFifo, 0});
    CHECK(b0.wait_beats == 1);
    CHECK(b0.outcome == AccessOutcome::FifoUnderflow);
}

TEST_CASE("read of write-only and write of read-only ports") {
    BusCore core(BusConfig{32, 1});
    const AccessResult r = core.cpu_access({AccessKind::Read, kOffTxFifo, 0});
    CHECK(r.outcome == AccessOutcome::WriteOnlyRead);
    CHECK(*r.data == 0);
    const AccessResult w = core.cpu_access({AccessKind::Write, kOffTxStatus, 0xFF});
    CHECK(w.outcome == AccessOutcome::ReadOnlyWrite);
    CHECK(core.tx(0).peek_status() == (status::kFifoEmpty));
}

TEST_CASE("RX_FIFO read on empty reports underflow and returns zero") {
    for (unsigned width : {8u, 16u, 32u}) {
        BusCore core(BusConfig{width, 1});
        uint32_t value = 0;
        bool underflow = false;
        for (unsigned beat = 0; beat < core.beats_for(kOffRxFifo); ++beat) {
            const AccessResult r = core.cpu_access({AccessKind::Read, kOffRxFifo, 0});
            if (r.outcome == AccessOutcome::FifoUnderflow) underflow = true;
            value |= (*r.data & width_mask(width)) << (beat * width);
        }
        CHECK(underflow);
        CHECK(value == 0);
    }
}

TEST_CASE("TX_FIFO write into a full fifo reports overflow on the final beat") {
    BusCore core(BusConfig{16, 1});
    for (int i = 0; i < 512; ++i) core.tx(0).write_word(Arinc429Word{1});
    core.cpu_access({AccessKind::Write, kOffTxFifo, 0x0001});
    const AccessResult last = core.cpu_access({AccessKind::Write, kOffTxFifo, 0x0000});
    CHECK(last.outcome == AccessOutcome::FifoOverflow);
    CHECK(core.tx(0).fifo().size() == 512);
}

TEST_CASE("status reads zero-extend and clear sticky bits") {
    BusCore core(BusConfig{32, 1});
    for (int i = 0; i < 513; ++i) core.tx(0).write_word(Arinc429Word{1});
    const uint32_t s1 = bus_read(core, kOffTxStatus);
    CHECK(s1 <= 0xFF);
    CHECK((s1 & status::kOverflow) != 0);
    const uint32_t s2 = bus_read(core, kOffTxStatus);
    CHECK((s2 & status::kOverflow) == 0);
}

TEST_CASE("FIFO level registers: 0 selects the default 256") {
    BusCore core(BusConfig{32, 1});
    bus_write(core, kOffTxFifoLevel, 5);
    CHECK(bus_read(core, kOffTxFifoLevel) == 5);
    for (int i = 0; i < 5; ++i) core.tx(0).write_word(Arinc429Word{1});
    CHECK((core.tx(0).peek_status() & status::kFifoHalfFull) != 0);
    bus_write(core, kOffTxFifoLevel, 0);
    CHECK(bus_read(core, kOffTxFifoLevel) == 0);
    CHECK((core.tx(0).peek_status() & status::kFifoHalfFull) == 0);  // level back to 256
}

TEST_CASE("label registers drive the rx label table") {
    BusCore core(BusConfig{32, 2});
    bus_write(core, make_address(1, kOffLabelIndex), 0xC8);
    bus_write(core, make_address(1, kOffLabelEnable), 1);
    CHECK(core.rx(1).label_enabled(0xC8));
    CHECK(bus_read(core, make_address(1, kOffLabelEnable)) == 1);
    bus_write(core, make_address(1, kOffLabelIndex), 0x11);
    CHECK(bus_read(core, make_address(1, kOffLabelEnable)) == 0);
    bus_write(core, make_address(1, kOffLabelEnable), 0);
    bus_write(core, make_address(1, kOffLabelIndex), 0xC8);
    CHECK(bus_read(core, make_address(1, kOffLabelEnable)) == 1);
}

TEST_CASE("aggregate interrupts: OR across channels and directions") {
    BusCore quiet(BusConfig{32, 16});
    const InterruptState none = quiet.aggregate_interrupts();
    CHECK_FALSE(none.int_out_rx);
    CHECK_FALSE(none.int_out_tx);
    CHECK_FALSE(none.int_out);

    BusCore core(BusConfig{32, 16});
    core.rx(9).write_control(ctrl::kIrqEmpty);  // empty fifo: flag high
    const InterruptState s = core.aggregate_interrupts();
    CHECK(s.int_out_rx);
    CHECK_FALSE(s.int_out_tx);
    CHECK(s.int_out);

    BusCore tx_only(BusConfig{32, 16});
    tx_only.tx(3).write_control(ctrl::kIrqEmpty);
    const InterruptState t = tx_only.aggregate_interrupts();
    CHECK_FALSE(t.int_out_rx);
    CHECK(t.int_out_tx);
    CHECK(t.int_out);
}

TEST_CASE("int_out equals the OR after every operation, randomized") {
    std::mt19937 rng(40);
    BusCore core(BusConfig{32, 16});
    for (int i = 0; i < 2000; ++i) {
        const uint16_t addr = static_cast<uint16_t>(rng() % 512);
        if (rng() & 1) {
            core.cpu_access({AccessKind::Write, addr, static_cast<uint32_t>(rng())});
        } else {
            core.cpu_access({AccessKind::Read, addr, 0});
        }
        bool rx_or = false, tx_or = false;
        for (unsigned ch = 0; ch < 16; ++ch) {
            rx_or = rx_or || core.rx(ch).interrupt();
            tx_or = tx_or || core.tx(ch).interrupt();
        }
        const InterruptState s = core.aggregate_interrupts();
        REQUIRE(s.int_out_rx == rx_or);
        REQUIRE(s.int_out_tx == tx_or);
        REQUIRE(s.int_out == (rx_or || tx_or));
    }
}

TEST_CASE("core_tick delegates to the channel serializers") {
    BusCore core(BusConfig{32, 2});
    CHECK(core.core_tick(0).empty());  // nothing enabled

    core.tx(1).write_control(ctrl::kEnable);
    const Arinc429Word w{0x80000013u};
    core.tx(1).write_word(w);
    const auto out = core.core_tick(0);
    const SymbolStream expect = modulate_word(w, BitRate::High);
    REQUIRE(out.size() == expect.size());
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].channel == 1);
        CHECK(out[i].emission.duration_ns == expect[i].duration_ns);
        CHECK(out[i].emission.level == expect[i].level);
    }
    const InterruptState after = core.aggregate_interrupts();
    CHECK(after == core.aggregate_interrupts());  // recomputation is pure
}

TEST_CASE("width independence: one register script, three widths") {
    std::mt19937 rng(41);
    std::vector<std::pair<bool, std::pair<uint16_t, uint32_t>>> ops;  // (is_write, (addr, val))
    for (int i = 0; i < 300; ++i) {
        const unsigned ch = rng() % 2;
        const unsigned pick = rng() % 8;
        const uint8_t offsets[8] = {kOffTxControl, kOffRxControl,  kOffTxFifo,
                                    kOffTxFifoLevel, kOffRxFifoLevel, kOffLabelIndex,
                                    kOffLabelEnable, kOffTxStatus};
        const uint16_t addr = make_address(ch, offsets[pick]);
        const bool is_write = offsets[pick] != kOffTxStatus;
        ops.push_back({is_write, {addr, rng()}});
    }
    std::string snaps[3];
    const unsigned widths[3] = {8, 16, 32};
    for (int wi = 0; wi < 3; ++wi) {
        BusCore core(BusConfig{widths[wi], 2});
        for (const auto& [is_write, op] : ops) {
            if (is_write) {
                bus_write(core, op.first, op.second);
            } else {
                bus_read(core, op.first);
            }
        }
        snaps[wi] = core.state_snapshot();
    }
    CHECK(snaps[0] == snaps[1]);
    CHECK(snaps[1] == snaps[2]);
}
