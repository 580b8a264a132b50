// line_coding.hpp -- bipolar return-to-zero modulation/demodulation.
//
// Each ARINC bit occupies one bit period: the first half-cell carries HI
// (bit = 1) or LO (bit = 0), the second half-cell is NULL. A word is the 32
// bit cells followed by a 4-bit-time NULL gap, 36 bit times total. The
// timeline is integer nanoseconds; both rates have even bit periods so
// half-cells are exact.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "arinc429/word.hpp"

namespace arinc429 {

// Tri-state line level plus the collision level produced when two
// transmitters drive the same wire. NULL is the idle level.
enum class LineLevel : uint8_t { Null, Hi, Lo, Collision };

enum class BitRate : uint8_t { High, Low };  // 100 kbit/s, 12.5 kbit/s

constexpr int64_t bit_period_ns(BitRate rate) {
    return rate == BitRate::High ? 10'000 : 80'000;
}

constexpr int64_t kWordBitCells = 32;
constexpr int64_t kGapBitTimes = 4;  // minimum inter-word gap

// Half-cell timing tolerance accepted by the demodulator, in percent.
constexpr int64_t kHalfCellTolerancePct = 5;

// One constant-level span. Streams are ordered span lists; consecutive
// entries share a level only across word boundaries (trailing gaps).
struct Span {
    int64_t duration_ns = 0;
    LineLevel level = LineLevel::Null;

    friend bool operator==(const Span&, const Span&) = default;
};

using SymbolStream = std::vector<Span>;

struct TimedSpan {
    int64_t t_start_ns = 0;
    int64_t duration_ns = 0;
    LineLevel level = LineLevel::Null;

    friend bool operator==(const TimedSpan&, const TimedSpan&) = default;
};

// A stream placed on an absolute timeline, for mixing.
struct OffsetStream {
    int64_t start_ns = 0;
    SymbolStream spans;
};

// Serializes one word: ARINC bits 1..32 in order, one (value, NULL)
// half-cell pair per bit, then the trailing gap span. 65 spans, total
// duration exactly 36 x bit_period_ns.
SymbolStream modulate_word(Arinc429Word word, BitRate rate);

constexpr int64_t word_duration_ns(BitRate rate) {
    return (kWordBitCells + kGapBitTimes) * bit_period_ns(rate);
}

// Point-wise combination of two levels sharing the wire: NULL is identity,
// any overlap of two non-NULL levels is a collision.
constexpr LineLevel mix_levels(LineLevel a, LineLevel b) {
    if (a == LineLevel::Null) return b;
    if (b == LineLevel::Null) return a;
    return LineLevel::Collision;
}

// Combines streams on a common timeline. Input span boundaries are kept as
// breakpoints (a single stream mixes to itself, exactly); intervals covered
// by no span come out as NULL fill.
std::vector<TimedSpan> mix(const std::vector<OffsetStream>& streams);

enum class RxErrorKind : uint8_t { RzViolation, ShortWord, LongWord };

struct RxEvent {
    enum class Kind : uint8_t { Word, Error };
    Kind kind = Kind::Word;
    Arinc429Word word;       // valid when kind == Word
    RxErrorKind error = RxErrorKind::RzViolation;  // valid when kind == Error

    static RxEvent make_word(Arinc429Word w) { return {Kind::Word, w, RxErrorKind::RzViolation}; }
    static RxEvent make_error(RxErrorKind e) { return {Kind::Error, {}, e}; }
};

// Receiver state. Values only move through demod_step; adjacent same-level
// spans are coalesced into runs internally, so a span split by the mixer
// demodulates the same as the unsplit stream.
struct DemodState {
    enum class Phase : uint8_t {
        Idle,       // hunting for a word gap
        AwaitGap,   // word just emitted, watching for the mandatory gap
        SyncValue,  // inside a word, collecting a HI/LO half-cell
        SyncNull,   // inside a word, collecting the NULL half-cell
    };

    Phase phase = Phase::Idle;
    uint32_t bits_collected = 0;
    uint32_t shift_register = 0;  // ARINC bit k at binary position k-1
    int64_t null_run_ns = 0;      // accumulated NULL in Idle/AwaitGap
    int64_t run_ns = 0;           // accumulated current half-cell run
    LineLevel run_level = LineLevel::Null;
    bool armed = true;            // reset behaves as an always-idle line
    BitRate current_rate = BitRate::High;
};

// Consumes one constant-level span and returns any events it produced.
// Line problems are reported as error events, never as failures.
std::vector<RxEvent> demod_step(DemodState& state, LineLevel level, int64_t duration_ns);

// Trace token for a level: "+1", "0", "-1" or "X".
std::string_view level_token(LineLevel level);

}  // namespace arinc429
