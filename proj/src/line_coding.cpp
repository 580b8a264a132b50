// line_coding.cpp -- RZ serializer, wire mixer and the receive state machine.

#include "arinc429/line_coding.hpp"

#include <algorithm>
#include <stdexcept>

namespace arinc429 {

SymbolStream modulate_word(Arinc429Word word, BitRate rate) {
    const int64_t half = bit_period_ns(rate) / 2;
    SymbolStream out;
    out.reserve(2 * kWordBitCells + 1);
    for (int bit = 0; bit < kWordBitCells; ++bit) {
        const bool one = (word.raw >> bit) & 1u;
        out.push_back({half, one ? LineLevel::Hi : LineLevel::Lo});
        out.push_back({half, LineLevel::Null});
    }
    out.push_back({kGapBitTimes * bit_period_ns(rate), LineLevel::Null});
    return out;
}

std::vector<TimedSpan> mix(const std::vector<OffsetStream>& streams) {
    // Sweep over all span edges, keeping per-level driver counts.
    struct Edge {
        int64_t t;
        int delta;
        LineLevel level;
    };
    std::vector<Edge> edges;
    for (const auto& s : streams) {
        int64_t t = s.start_ns;
        for (const auto& span : s.spans) {
            if (span.duration_ns <= 0) {
                throw std::invalid_argument("mix: span durations must be positive");
            }
            edges.push_back({t, +1, span.level});
            edges.push_back({t + span.duration_ns, -1, span.level});
            t += span.duration_ns;
        }
    }
    std::vector<TimedSpan> out;
    if (edges.empty()) return out;
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.t < b.t; });

    int64_t counts[4] = {0, 0, 0, 0};
    size_t i = 0;
    int64_t t = edges.front().t;
    while (i < edges.size()) {
        while (i < edges.size() && edges[i].t == t) {
            counts[static_cast<size_t>(edges[i].level)] += edges[i].delta;
            ++i;
        }
        if (i == edges.size()) break;
        const int64_t next = edges[i].t;
        const int64_t drivers = counts[static_cast<size_t>(LineLevel::Hi)] +
                                counts[static_cast<size_t>(LineLevel::Lo)] +
                                counts[static_cast<size_t>(LineLevel::Collision)];
        LineLevel level = LineLevel::Null;
        if (drivers >= 2 || counts[static_cast<size_t>(LineLevel::Collision)] > 0) {
            level = LineLevel::Collision;
        } else if (counts[static_cast<size_t>(LineLevel::Hi)] > 0) {
            level = LineLevel::Hi;
        } else if (counts[static_cast<size_t>(LineLevel::Lo)] > 0) {
            level = LineLevel::Lo;
        }
        if (next > t) out.push_back({t, next - t, level});
        t = next;
    }
    return out;
}

namespace {

int64_t half_cell_ns(BitRate rate) { return bit_period_ns(rate) / 2; }

void reset_to_idle(DemodState& s, int64_t null_credit_ns) {
    s.phase = DemodState::Phase::Idle;
    s.bits_collected = 0;
    s.shift_register = 0;
    s.run_ns = 0;
    s.run_level = LineLevel::Null;
    s.null_run_ns = null_credit_ns;
    s.armed = null_credit_ns >= kGapBitTimes * bit_period_ns(s.current_rate);
}

}  // namespace

std::vector<RxEvent> demod_step(DemodState& s, LineLevel level, int64_t duration_ns) {
    if (duration_ns <= 0) {
        throw std::invalid_argument("demod_step: duration_ns must be positive");
    }
    std::vector<RxEvent> events;
    const int64_t half = half_cell_ns(s.current_rate);
    const int64_t half_low = half * (100 - kHalfCellTolerancePct) / 100;
    const int64_t half_high = half * (100 + kHalfCellTolerancePct) / 100;
    const int64_t gap_min = kGapBitTimes * bit_period_ns(s.current_rate);

    using Phase = DemodState::Phase;
    switch (s.phase) {
        case Phase::Idle:
            if (level == LineLevel::Null) {
                s.null_run_ns += duration_ns;
                if (s.null_run_ns >= gap_min) s.armed = true;
                break;
            }
            if (!s.armed) {
                s.null_run_ns = 0;
                break;
            }
            if (level == LineLevel::Collision) {
                events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                reset_to_idle(s, 0);
                break;
            }
            // Sync achieved: this half-cell starts ARINC bit 1.
            s.phase = Phase::SyncValue;
            s.bits_collected = 0;
            s.shift_register = 0;
            s.run_level = level;
            s.run_ns = duration_ns;
            s.null_run_ns = 0;
            s.armed = false;
            if (s.run_ns > half_high) {
                events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                reset_to_idle(s, 0);
            }
            break;

        case Phase::AwaitGap:
            if (level == LineLevel::Null) {
                s.null_run_ns += duration_ns;
                if (s.null_run_ns >= gap_min) {
                    s.phase = Phase::Idle;
                    s.armed = true;
                }
                break;
            }
            // Non-NULL before the mandatory gap elapsed: a 33rd bit cell.
            events.push_back(RxEvent::make_error(RxErrorKind::LongWord));
            reset_to_idle(s, 0);
            break;

        case Phase::SyncValue:
            if (level == s.run_level) {
                s.run_ns += duration_ns;
                if (s.run_ns > half_high) {
                    events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                    reset_to_idle(s, 0);
                }
                break;
            }
            if (level == LineLevel::Null) {
                if (s.run_ns < half_low) {  // too-long runs already rejected above
                    events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                    reset_to_idle(s, duration_ns);
                    break;
                }
                // Value half-cell good: record the bit, start the NULL half.
                s.shift_register |= (s.run_level == LineLevel::Hi ? 1u : 0u) << s.bits_collected;
                s.bits_collected += 1;
                s.phase = Phase::SyncNull;
                s.run_level = LineLevel::Null;
                s.run_ns = duration_ns;
                if (s.bits_collected == kWordBitCells) {
                    if (s.run_ns >= half_low) {
                        events.push_back(RxEvent::make_word(Arinc429Word{s.shift_register}));
                        const int64_t credit = s.run_ns > half ? s.run_ns - half : 0;
                        s.phase = Phase::AwaitGap;
                        s.bits_collected = 0;
                        s.shift_register = 0;
                        s.run_ns = 0;
                        s.null_run_ns = credit;
                        if (s.null_run_ns >= gap_min) {
                            s.phase = Phase::Idle;
                            s.armed = true;
                        }
                    }
                } else if (s.run_ns > half_high) {
                    events.push_back(RxEvent::make_error(RxErrorKind::ShortWord));
                    reset_to_idle(s, s.run_ns);
                }
                break;
            }
            // Opposite polarity or collision where the NULL half was due.
            events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
            reset_to_idle(s, 0);
            break;

        case Phase::SyncNull:
            if (level == LineLevel::Null) {
                s.run_ns += duration_ns;
                if (s.bits_collected == kWordBitCells) {
                    if (s.run_ns >= half_low) {
                        events.push_back(RxEvent::make_word(Arinc429Word{s.shift_register}));
                        const int64_t credit = s.run_ns > half ? s.run_ns - half : 0;
                        s.phase = Phase::AwaitGap;
                        s.bits_collected = 0;
                        s.shift_register = 0;
                        s.run_ns = 0;
                        s.null_run_ns = credit;
                        if (s.null_run_ns >= gap_min) {
                            s.phase = Phase::Idle;
                            s.armed = true;
                        }
                    }
                } else if (s.run_ns > half_high) {
                    // The next value half-cell never came: the word ended early.
                    events.push_back(RxEvent::make_error(RxErrorKind::ShortWord));
                    reset_to_idle(s, s.run_ns);
                }
                break;
            }
            if (s.run_ns < half_low) {
                events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                reset_to_idle(s, 0);
                break;
            }
            if (level == LineLevel::Collision) {
                events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                reset_to_idle(s, 0);
                break;
            }
            // NULL half complete; this span starts the next value half.
            s.phase = Phase::SyncValue;
            s.run_level = level;
            s.run_ns = duration_ns;
            if (s.run_ns > half_high) {
                events.push_back(RxEvent::make_error(RxErrorKind::RzViolation));
                reset_to_idle(s, 0);
            }
            break;
    }
    return events;
}

std::string_view level_token(LineLevel level) {
    switch (level) {
        case LineLevel::Hi: return "+1";
        case LineLevel::Lo: return "-1";
        case LineLevel::Collision: return "X";
        case LineLevel::Null: break;
    }
    return "0";
}

}  // namespace arinc429
