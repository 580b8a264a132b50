#include "arinc429/channel.hpp"

#include <stdexcept>

namespace arinc429 {

namespace {

uint8_t flags_to_status(WordFifo::Flags f, uint8_t sticky) {
    uint8_t s = sticky;
    if (f.empty) s |= status::kFifoEmpty;
    if (f.half_full) s |= status::kFifoHalfFull;
    if (f.full) s |= status::kFifoFull;
    return s;
}

}  // namespace

uint8_t TxChannel::read_status() {
    const uint8_t s = peek_status();
    sticky_ = 0;
    return s;
}

uint8_t TxChannel::peek_status() const {
    return flags_to_status(fifo_.flags(), sticky_);
}

PushResult TxChannel::write_word(Arinc429Word raw) {
    if (control_ & ctrl::kParityEnable) {
        const uint32_t payload = raw.raw & 0x7FFFFFFFu;
        raw.raw = payload | (compute_parity(payload) << 31);
    }
    const PushResult r = fifo_.push(raw);
    if (r == PushResult::Overflow) sticky_ |= status::kOverflow;
    return r;
}

PushResult TxChannel::write_word(const WordFields& fields) {
    return write_word(assemble(fields, false));
}

std::optional<TxChannel::Emission> TxChannel::tick(int64_t now_ns) {
    if (cursor_ >= stream_.size()) {
        // Line idle; a queued word may start once the previous word's
        // trailing gap has elapsed and the channel is enabled.
        if (now_ns < line_free_at_) return std::nullopt;
        if (!(control_ & ctrl::kEnable)) return std::nullopt;
        const auto word = fifo_.pop();
        if (!word) return std::nullopt;
        const BitRate r = rate();  // captured here; mid-word changes wait for the boundary
        stream_ = modulate_word(*word, r);
        cursor_ = 0;
        span_offset_ns_ = 0;
        word_start_ns_ = now_ns > line_free_at_ ? now_ns : line_free_at_;
        line_free_at_ = word_start_ns_ + word_duration_ns(r);
        words_started_ += 1;
    }
    const Span& span = stream_[cursor_];
    Emission e;
    e.t_start_ns = word_start_ns_ + span_offset_ns_;
    e.duration_ns = span.duration_ns;
    e.level = span.level;
    e.word_ordinal = words_started_ - 1;
    e.span_index = static_cast<uint32_t>(cursor_);
    span_offset_ns_ += span.duration_ns;
    cursor_ += 1;
    return e;
}

uint8_t RxChannel::read_status() {
    const uint8_t s = peek_status();
    sticky_ = 0;
    return s;
}

uint8_t RxChannel::peek_status() const {
    return flags_to_status(fifo_.flags(), sticky_);
}

std::vector<RxChannel::Notification> RxChannel::feed(LineLevel level, int64_t duration_ns) {
    std::vector<Notification> out;
    demod_.current_rate = rate();
    for (const RxEvent& ev : demod_step(demod_, level, duration_ns)) {
        if (ev.kind == RxEvent::Kind::Error) {
            out.push_back({Notification::Kind::LineError, {}, ev.error});
            continue;
        }
        const Arinc429Word w = ev.word;
        if ((control_ & ctrl::kParityEnable) && !check_parity(w)) {
            sticky_ |= status::kParityError;
            out.push_back({Notification::Kind::WordDroppedParity, w, {}});
            continue;
        }
        if (control_ & ctrl::kLabelFilter) {
            const uint8_t label = disassemble(w).label;
            if (!label_table_[label]) {
                out.push_back({Notification::Kind::WordDroppedFilter, w, {}});
                continue;
            }
        }
        if (fifo_.push(w) == PushResult::Overflow) {
            sticky_ |= status::kOverflow;
            out.push_back({Notification::Kind::WordDroppedOverflow, w, {}});
        } else {
            out.push_back({Notification::Kind::WordStored, w, {}});
        }
    }
    return out;
}

void RxChannel::set_label(unsigned label, bool enabled) {
    if (label > 255) throw std::out_of_range("RxChannel::set_label: label must be < 256");
    label_table_[label] = enabled;
}

}  // namespace arinc429
