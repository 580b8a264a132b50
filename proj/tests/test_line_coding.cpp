#include <doctest.h>

#include <random>
#include <stdexcept>

#include "arinc429/line_coding.hpp"

using namespace arinc429;

namespace {

Arinc429Word random_word(std::mt19937& rng) {
    WordFields f;
    f.label = static_cast<uint8_t>(rng());
    f.sdi = static_cast<uint8_t>(rng() & 3);
    f.data = rng() & 0x7FFFFu;
    f.ssm = static_cast<uint8_t>(rng() & 3);
    return assemble(f, true);
}

// Feeds a stream span by span, collecting all events.
std::vector<RxEvent> feed_all(DemodState& d, const SymbolStream& s) {
    std::vector<RxEvent> out;
    for (const Span& sp : s) {
        for (const RxEvent& e : demod_step(d, sp.level, sp.duration_ns)) out.push_back(e);
    }
    return out;
}

unsigned count_words(const std::vector<RxEvent>& events, uint32_t raw) {
    unsigned n = 0;
    for (const RxEvent& e : events) {
        if (e.kind == RxEvent::Kind::Word && e.word.raw == raw) n += 1;
    }
    return n;
}

unsigned count_errors(const std::vector<RxEvent>& events) {
    unsigned n = 0;
    for (const RxEvent& e : events) {
        if (e.kind == RxEvent::Kind::Error) n += 1;
    }
    return n;
}

}  // namespace

TEST_CASE("bit periods and durations") {
    CHECK(bit_period_ns(BitRate::High) == 10'000);
    CHECK(bit_period_ns(BitRate::Low) == 80'000);
    CHECK(word_duration_ns(BitRate::High) == 360'000);
    CHECK(word_duration_ns(BitRate::Low) == 2'880'000);
}

TEST_CASE("modulate_word 0x00000001 at High rate") {
    const SymbolStream s = modulate_word(Arinc429Word{0x00000001u}, BitRate::High);
    REQUIRE(s.size() == 65);
    CHECK(s[0] == Span{5'000, LineLevel::Hi});
    CHECK(s[1] == Span{5'000, LineLevel::Null});
    for (size_t bit = 1; bit < 32; ++bit) {
        CHECK(s[2 * bit] == Span{5'000, LineLevel::Lo});
        CHECK(s[2 * bit + 1] == Span{5'000, LineLevel::Null});
    }
    CHECK(s[64] == Span{40'000, LineLevel::Null});
    int64_t total = 0;
    for (const Span& sp : s) total += sp.duration_ns;
    CHECK(total == 360'000);
}

TEST_CASE("modulate_word all-zero word is 32 LO half-cells") {
    const SymbolStream s = modulate_word(Arinc429Word{0}, BitRate::High);
    REQUIRE(s.size() == 65);
    int64_t total = 0;
    for (size_t bit = 0; bit < 32; ++bit) {
        CHECK(s[2 * bit].level == LineLevel::Lo);
        CHECK(s[2 * bit + 1].level == LineLevel::Null);
    }
    for (const Span& sp : s) total += sp.duration_ns;
    CHECK(total == 360'000);
}

TEST_CASE("modulate_word at Low rate lasts 2 880 000 ns") {
    std::mt19937 rng(10);
    for (int i = 0; i < 50; ++i) {
        const SymbolStream s = modulate_word(random_word(rng), BitRate::Low);
        int64_t total = 0;
        for (const Span& sp : s) total += sp.duration_ns;
        CHECK(total == 2'880'000);
    }
}

TEST_CASE("modulation emits ARINC bits 1..32 in word order") {
    // independent check: span 2(k-1) must carry bit k of the raw word
    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Arinc429Word w = random_word(rng);
        const SymbolStream s = modulate_word(w, BitRate::High);
        for (unsigned bit = 1; bit <= 32; ++bit) {
            const bool one = (w.raw >> (bit - 1)) & 1u;
            CHECK(s[2 * (bit - 1)].level == (one ? LineLevel::Hi : LineLevel::Lo));
        }
    }
}

TEST_CASE("loopback: demodulating a modulated word yields exactly that word") {
    std::mt19937 rng(12);
    for (BitRate rate : {BitRate::High, BitRate::Low}) {
        DemodState d;
        d.current_rate = rate;
        for (int i = 0; i < 1000; ++i) {
            const Arinc429Word w = random_word(rng);
            const auto events = feed_all(d, modulate_word(w, rate));
            REQUIRE(events.size() == 1);
            CHECK(count_words(events, w.raw) == 1);
        }
    }
}

TEST_CASE("gap law: k concatenated words give k word events, no errors") {
    std::mt19937 rng(13);
    DemodState d;
    d.current_rate = BitRate::High;
    std::vector<uint32_t> sent;
    std::vector<RxEvent> events;
    for (int k = 0; k < 20; ++k) {
        const Arinc429Word w = random_word(rng);
        sent.push_back(w.raw);
        for (const RxEvent& e : feed_all(d, modulate_word(w, BitRate::High))) {
            events.push_back(e);
        }
    }
    REQUIRE(events.size() == 20);
    CHECK(count_errors(events) == 0);
    for (size_t i = 0; i < 20; ++i) {
        CHECK(events[i].kind == RxEvent::Kind::Word);
        CHECK(events[i].word.raw == sent[i]);
    }
}

TEST_CASE("split spans demodulate identically to whole spans") {
    std::mt19937 rng(14);
    for (int i = 0; i < 100; ++i) {
        const Arinc429Word w = random_word(rng);
        DemodState d;
        d.current_rate = BitRate::High;
        std::vector<RxEvent> events;
        for (const Span& sp : modulate_word(w, BitRate::High)) {
            const int64_t cut = 1 + static_cast<int64_t>(rng() % (sp.duration_ns - 1));
            for (const RxEvent& e : demod_step(d, sp.level, cut)) events.push_back(e);
            for (const RxEvent& e : demod_step(d, sp.level, sp.duration_ns - cut)) {
                events.push_back(e);
            }
        }
        REQUIRE(events.size() == 1);
        CHECK(count_words(events, w.raw) == 1);
    }
}

TEST_CASE("31 bit cells followed by a gap is a ShortWord") {
    DemodState d;
    d.current_rate = BitRate::High;
    std::vector<RxEvent> events;
    auto step = [&](LineLevel l, int64_t ns) {
        for (const RxEvent& e : demod_step(d, l, ns)) events.push_back(e);
    };
    step(LineLevel::Null, 40'000);
    for (int bit = 0; bit < 31; ++bit) {
        step(LineLevel::Hi, 5'000);
        step(LineLevel::Null, 5'000);
    }
    step(LineLevel::Null, 40'000);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == RxEvent::Kind::Error);
    CHECK(events[0].error == RxErrorKind::ShortWord);
}

TEST_CASE("continuous NULL produces no events and stays idle") {
    DemodState d;
    d.current_rate = BitRate::High;
    for (int i = 0; i < 1000; ++i) {
        CHECK(demod_step(d, LineLevel::Null, 100'000).empty());
    }
    CHECK(d.phase == DemodState::Phase::Idle);
}

TEST_CASE("demodulator starts armed: a word at t=0 after reset is received") {
    DemodState d;
    d.current_rate = BitRate::High;
    const Arinc429Word w{0x9376C1D2u};
    const auto events = feed_all(d, modulate_word(w, BitRate::High));
    REQUIRE(events.size() == 1);
    CHECK(count_words(events, w.raw) == 1);
}

TEST_CASE("half-cell tolerance is exactly +/-5 percent") {
    auto word_with_first_half = [](int64_t first_half_ns) {
        DemodState d;
        d.current_rate = BitRate::High;
        std::vector<RxEvent> events;
        auto step = [&](LineLevel l, int64_t ns) {
            for (const RxEvent& e : demod_step(d, l, ns)) events.push_back(e);
        };
        step(LineLevel::Null, 40'000);
        step(LineLevel::Hi, first_half_ns);
        step(LineLevel::Null, 5'000);
        for (int bit = 1; bit < 32; ++bit) {
            step(LineLevel::Lo, 5'000);
            step(LineLevel::Null, 5'000);
        }
        step(LineLevel::Null, 40'000);
        return events;
    };
    CHECK(count_words(word_with_first_half(5'000), 0x00000001u) == 1);
    CHECK(count_words(word_with_first_half(4'750), 0x00000001u) == 1);
    CHECK(count_words(word_with_first_half(5'250), 0x00000001u) == 1);
    CHECK(count_errors(word_with_first_half(4'749)) >= 1);
    CHECK(count_errors(word_with_first_half(5'251)) >= 1);
}

TEST_CASE("resync: a clean word right after each error kind is received") {
    std::mt19937 rng(15);
    DemodState d;
    d.current_rate = BitRate::High;
    auto step = [&](LineLevel l, int64_t ns) { return demod_step(d, l, ns); };

    for (int i = 0; i < 50; ++i) {
        // RzViolation: over-long value half-cell
        step(LineLevel::Null, 40'000);
        step(LineLevel::Hi, 9'000);
        // ShortWord: 5 clean bit cells then silence
        step(LineLevel::Null, 40'000);
        for (int bit = 0; bit < 5; ++bit) {
            step(LineLevel::Lo, 5'000);
            step(LineLevel::Null, 5'000);
        }
        step(LineLevel::Null, 40'000);
        const Arinc429Word w = random_word(rng);
        const auto events = feed_all(d, modulate_word(w, BitRate::High));
        REQUIRE(count_words(events, w.raw) == 1);
    }
}

TEST_CASE("mix of a single stream is that stream") {
    const SymbolStream s = modulate_word(Arinc429Word{0x55AA55AAu}, BitRate::High);
    const auto mixed = mix({OffsetStream{1'000, s}});
    REQUIRE(mixed.size() == s.size());
    int64_t at = 1'000;
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(mixed[i].t_start_ns == at);
        CHECK(mixed[i].duration_ns == s[i].duration_ns);
        CHECK(mixed[i].level == s[i].level);
        at += s[i].duration_ns;
    }
}

TEST_CASE("mix with an aligned all-NULL stream is the identity") {
    const SymbolStream s = modulate_word(Arinc429Word{0x12345678u}, BitRate::High);
    const SymbolStream quiet{{360'000, LineLevel::Null}};
    const auto mixed = mix({OffsetStream{0, s}, OffsetStream{0, quiet}});
    REQUIRE(mixed.size() == s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(mixed[i].duration_ns == s[i].duration_ns);
        CHECK(mixed[i].level == s[i].level);
    }
}

TEST_CASE("mix fills uncovered time with NULL") {
    const SymbolStream a{{100, LineLevel::Hi}};
    const SymbolStream b{{100, LineLevel::Lo}};
    const auto mixed = mix({OffsetStream{0, a}, OffsetStream{300, b}});
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0] == TimedSpan{0, 100, LineLevel::Hi});
    CHECK(mixed[1] == TimedSpan{100, 200, LineLevel::Null});
    CHECK(mixed[2] == TimedSpan{300, 100, LineLevel::Lo});
}

TEST_CASE("overlapping drivers collide, even at the same level") {
    const SymbolStream a{{100, LineLevel::Hi}};
    const auto hilo = mix({OffsetStream{0, a}, OffsetStream{50, SymbolStream{{100, LineLevel::Lo}}}});
    REQUIRE(hilo.size() == 3);
    CHECK(hilo[1] == TimedSpan{50, 50, LineLevel::Collision});
    const auto hihi = mix({OffsetStream{0, a}, OffsetStream{0, a}});
    REQUIRE(hihi.size() == 1);
    CHECK(hihi[0].level == LineLevel::Collision);
}

TEST_CASE("two words overlapping by one bit produce an RzViolation") {
    const Arinc429Word wa = assemble({0305, 1, 0x1111, 0, 0}, true);
    const Arinc429Word wb = assemble({0012, 2, 0x2222, 1, 0}, true);
    const auto mixed = mix({OffsetStream{0, modulate_word(wa, BitRate::High)},
                            OffsetStream{310'000, modulate_word(wb, BitRate::High)}});
    DemodState d;
    d.current_rate = BitRate::High;
    unsigned rz = 0;
    for (const TimedSpan& span : mixed) {
        for (const RxEvent& e : demod_step(d, span.level, span.duration_ns)) {
            if (e.kind == RxEvent::Kind::Error && e.error == RxErrorKind::RzViolation) rz += 1;
        }
    }
    CHECK(rz >= 1);
}

TEST_CASE("level tokens") {
    CHECK(level_token(LineLevel::Hi) == "+1");
    CHECK(level_token(LineLevel::Null) == "0");
    CHECK(level_token(LineLevel::Lo) == "-1");
    CHECK(level_token(LineLevel::Collision) == "X");
}

TEST_CASE("demod rejects non-positive durations") {
    DemodState d;
    CHECK_THROWS_AS(demod_step(d, LineLevel::Null, 0), std::invalid_argument);
    CHECK_THROWS_AS(demod_step(d, LineLevel::Hi, -5), std::invalid_argument);
}
