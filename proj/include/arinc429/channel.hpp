// channel.hpp -- one Tx or Rx channel: control/status registers, the
// serializer/demodulator glue, label filtering and interrupt generation.
//
// Control register layout (both directions; bit 7 reserved, reads 0):
//   bit 0  enable
//   bit 1  parity enable (Tx: insert, Rx: check)
//   bit 2  rate select (0 = High 100 kbit/s, 1 = Low 12.5 kbit/s)
//   bit 3  label filter enable (Rx only; reserved on Tx)
//   bit 4  interrupt on fifo empty
//   bit 5  interrupt on fifo half_full
//   bit 6  interrupt on fifo full
//
// Status register layout:
//   bits 0..2 mirror the fifo flags (empty, half_full, full)
//   bit 3  sticky parity error (Rx)      -- cleared by read_status
//   bit 4  sticky fifo overflow          -- cleared by read_status

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "arinc429/fifo.hpp"
#include "arinc429/line_coding.hpp"
#include "arinc429/word.hpp"

namespace arinc429 {

namespace ctrl {
inline constexpr uint8_t kEnable = 1u << 0;
inline constexpr uint8_t kParityEnable = 1u << 1;
inline constexpr uint8_t kRateSelect = 1u << 2;
inline constexpr uint8_t kLabelFilter = 1u << 3;
inline constexpr uint8_t kIrqEmpty = 1u << 4;
inline constexpr uint8_t kIrqHalfFull = 1u << 5;
inline constexpr uint8_t kIrqFull = 1u << 6;
inline constexpr uint8_t kWritableMask = 0x7F;  // bit 7 reserved
}  // namespace ctrl

namespace status {
inline constexpr uint8_t kFifoEmpty = 1u << 0;
inline constexpr uint8_t kFifoHalfFull = 1u << 1;
inline constexpr uint8_t kFifoFull = 1u << 2;
inline constexpr uint8_t kParityError = 1u << 3;
inline constexpr uint8_t kOverflow = 1u << 4;
inline constexpr uint8_t kStickyMask = kParityError | kOverflow;
}  // namespace status

// int_out_rx / int_out_tx: a fifo status flag is high and its interrupt
// enable bit is set. Pure in (status, control).
constexpr bool interrupt_from(uint8_t status_reg, uint8_t control_reg) {
    return (status_reg & (control_reg >> 4) & 0x7u) != 0;
}

class TxChannel {
public:
    // One constant-level span scheduled on the line.
    struct Emission {
        int64_t t_start_ns = 0;
        int64_t duration_ns = 0;
        LineLevel level = LineLevel::Null;
        uint32_t word_ordinal = 0;  // per-channel transmitted word index
        uint32_t span_index = 0;    // 0..64 within the word
    };

    void write_control(uint8_t value) { control_ = value & ctrl::kWritableMask; }
    uint8_t control() const { return control_; }

    uint8_t read_status();               // clears sticky bits
    uint8_t peek_status() const;         // no side effects
    bool interrupt() const { return interrupt_from(peek_status(), control_); }

    BitRate rate() const {
        return (control_ & ctrl::kRateSelect) ? BitRate::Low : BitRate::High;
    }

    // Queues a word. With parity enabled, ARINC bit 32 is recomputed before
    // the word enters the fifo, so fifo contents are exactly what will be
    // transmitted. Overflow drops the word and latches the sticky bit.
    PushResult write_word(Arinc429Word raw);
    PushResult write_word(const WordFields& fields);

    // Emits the next scheduled span, or starts the next queued word when the
    // line is free at now_ns and the channel is enabled. Returns nullopt
    // when there is nothing to emit: the line rests at NULL. Callers that
    // want gapless back-to-back words must poll again at line_free_at().
    std::optional<Emission> tick(int64_t now_ns);

    bool transmitting() const { return cursor_ < stream_.size(); }
    int64_t line_free_at() const { return line_free_at_; }
    uint32_t words_started() const { return words_started_; }

    const WordFifo& fifo() const { return fifo_; }
    void set_fifo_level(size_t level) { fifo_.set_level(level); }

private:
    uint8_t control_ = 0;
    uint8_t sticky_ = 0;
    WordFifo fifo_;

    // serializer
    SymbolStream stream_;
    size_t cursor_ = 0;
    int64_t word_start_ns_ = 0;
    int64_t span_offset_ns_ = 0;
    int64_t line_free_at_ = 0;
    uint32_t words_started_ = 0;
};

class RxChannel {
public:
    struct Notification {
        enum class Kind : uint8_t {
            WordStored,
            WordDroppedParity,
            WordDroppedFilter,
            WordDroppedOverflow,
            LineError,
        };
        Kind kind = Kind::WordStored;
        Arinc429Word word;                             // word notifications
        RxErrorKind error = RxErrorKind::RzViolation;  // LineError only
    };

    void write_control(uint8_t value) { control_ = value & ctrl::kWritableMask; }
    uint8_t control() const { return control_; }

    uint8_t read_status();
    uint8_t peek_status() const;
    bool interrupt() const { return interrupt_from(peek_status(), control_); }

    BitRate rate() const {
        return (control_ & ctrl::kRateSelect) ? BitRate::Low : BitRate::High;
    }

    // Advances the demodulator by one constant-level span. Completed words
    // go through parity check and label compare against the current table
    // ("new label" semantics: the table is consulted at the instant the
    // word completes, never a snapshot).
    std::vector<Notification> feed(LineLevel level, int64_t duration_ns);

    // Throws std::out_of_range for label > 255 (callers passing wider ints).
    void set_label(unsigned label, bool enabled);
    bool label_enabled(uint8_t label) const { return label_table_[label]; }
    const std::array<bool, 256>& label_table() const { return label_table_; }

    std::optional<Arinc429Word> read_word() { return fifo_.pop(); }

    const WordFifo& fifo() const { return fifo_; }
    void set_fifo_level(size_t level) { fifo_.set_level(level); }

    const DemodState& demod() const { return demod_; }

private:
    uint8_t control_ = 0;
    uint8_t sticky_ = 0;
    WordFifo fifo_;
    DemodState demod_;
    std::array<bool, 256> label_table_{};  // all disabled at reset
};

}  // namespace arinc429
