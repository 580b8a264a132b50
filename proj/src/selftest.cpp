#include "arinc429/selftest.hpp"

#include <deque>
#include <random>
#include <sstream>

#include "arinc429/bus_core.hpp"
#include "arinc429/simulator.hpp"

namespace arinc429 {

namespace {

struct Checker {
    SelftestResult result;

    void check(const std::string& name, bool ok, const std::string& detail = "") {
        if (ok) {
            result.passed += 1;
            result.lines.push_back("ok " + name);
        } else {
            result.failed += 1;
            result.lines.push_back("FAIL " + name + (detail.empty() ? "" : ": " + detail));
        }
    }
};

void codec_checks(Checker& c) {
    std::mt19937 rng(0xA429u);
    std::uniform_int_distribution<uint32_t> data_dist(0, 0x7FFFF);
    bool round_trip = true;
    for (unsigned label = 0; label < 256 && round_trip; ++label) {
        for (unsigned sdi = 0; sdi < 4; ++sdi) {
            for (unsigned ssm = 0; ssm < 4; ++ssm) {
                WordFields f;
                f.label = static_cast<uint8_t>(label);
                f.sdi = static_cast<uint8_t>(sdi);
                f.ssm = static_cast<uint8_t>(ssm);
                f.data = data_dist(rng);
                const Arinc429Word w = assemble(f, true);
                const WordFields back = disassemble(w);
                if (back.label != f.label || back.sdi != f.sdi || back.data != f.data ||
                    back.ssm != f.ssm || !check_parity(w)) {
                    round_trip = false;
                }
            }
        }
    }
    c.check("codec round trip", round_trip);

    bool flips_detected = true;
    for (int i = 0; i < 100; ++i) {
        WordFields f;
        f.label = static_cast<uint8_t>(rng());
        f.sdi = static_cast<uint8_t>(rng() & 3);
        f.ssm = static_cast<uint8_t>(rng() & 3);
        f.data = data_dist(rng);
        const Arinc429Word w = assemble(f, true);
        for (unsigned bit = 0; bit < 32; ++bit) {
            if (check_parity(Arinc429Word{w.raw ^ (1u << bit)})) flips_detected = false;
        }
    }
    c.check("parity single-bit sensitivity", flips_detected);

    const uint32_t all = kLabelMask | kSdiMask | kDataMask | kSsmMask | kParityMask;
    const bool disjoint = (kLabelMask & kSdiMask) == 0 && (kSdiMask & kDataMask) == 0 &&
                          (kDataMask & kSsmMask) == 0 && (kSsmMask & kParityMask) == 0;
    c.check("field masks partition the word", all == 0xFFFFFFFFu && disjoint);
}

void line_coding_checks(Checker& c) {
    std::mt19937 rng(0x429429u);
    bool loopback = true;
    bool shape = true;
    for (BitRate rate : {BitRate::High, BitRate::Low}) {
        for (int i = 0; i < 200; ++i) {
            WordFields f;
            f.label = static_cast<uint8_t>(rng());
            f.sdi = static_cast<uint8_t>(rng() & 3);
            f.ssm = static_cast<uint8_t>(rng() & 3);
            f.data = rng() & 0x7FFFF;
            const Arinc429Word w = assemble(f, true);
            const SymbolStream s = modulate_word(w, rate);
            int64_t total = 0;
            for (const Span& sp : s) total += sp.duration_ns;
            if (s.size() != 65 || total != word_duration_ns(rate)) shape = false;
            DemodState d;
            d.current_rate = rate;
            unsigned words = 0;
            for (const Span& sp : s) {
                for (const RxEvent& e : demod_step(d, sp.level, sp.duration_ns)) {
                    if (e.kind == RxEvent::Kind::Word && e.word.raw == w.raw) words += 1;
                }
            }
            if (words != 1) loopback = false;
        }
    }
    c.check("modulation shape (65 spans, 36 bit times)", shape);
    c.check("modulate/demodulate loopback", loopback);

    const Arinc429Word w{0x9376C1D2u};
    const SymbolStream s = modulate_word(w, BitRate::High);
    const auto mixed = mix({OffsetStream{0, s}});
    bool identity = mixed.size() == s.size();
    int64_t at = 0;
    for (size_t i = 0; identity && i < s.size(); ++i) {
        identity = mixed[i].t_start_ns == at && mixed[i].duration_ns == s[i].duration_ns &&
                   mixed[i].level == s[i].level;
        at += s[i].duration_ns;
    }
    c.check("single-stream mix identity", identity);
}

void fifo_checks(Checker& c) {
    std::mt19937 rng(77u);
    WordFifo fifo;
    std::deque<uint32_t> ref;
    bool ok = true;
    for (int i = 0; i < 2000 && ok; ++i) {
        if (rng() & 1) {
            const uint32_t v = rng();
            const PushResult r = fifo.push(Arinc429Word{v});
            if (ref.size() < WordFifo::kCapacity) {
                if (r != PushResult::Ok) ok = false;
                ref.push_back(v);
            } else if (r != PushResult::Overflow) {
                ok = false;
            }
        } else {
            const auto got = fifo.pop();
            if (ref.empty()) {
                if (got) ok = false;
            } else {
                if (!got || got->raw != ref.front()) ok = false;
                ref.pop_front();
            }
        }
        const auto f = fifo.flags();
        if (f.empty != ref.empty() || f.half_full != (ref.size() >= 256) ||
            f.full != (ref.size() >= WordFifo::kCapacity)) {
            ok = false;
        }
    }
    c.check("fifo matches reference queue", ok);

    WordFifo wm;
    wm.set_level(3);
    wm.push(Arinc429Word{1});
    wm.push(Arinc429Word{2});
    const bool below = !wm.flags().half_full;
    wm.push(Arinc429Word{3});
    const bool at = wm.flags().half_full;
    wm.pop();
    const bool after = !wm.flags().half_full;
    c.check("watermark boundary", below && at && after);
}

void interrupt_checks(Checker& c) {
    bool table = true;
    for (unsigned s = 0; s < 8; ++s) {
        for (unsigned e = 0; e < 8; ++e) {
            const bool expect = (s & e) != 0;
            if (interrupt_from(static_cast<uint8_t>(s), static_cast<uint8_t>(e << 4)) != expect) {
                table = false;
            }
        }
    }
    c.check("per-channel interrupt truth table", table);

    bool aggregate = true;
    for (unsigned rx = 0; rx < 2; ++rx) {
        for (unsigned tx = 0; tx < 2; ++tx) {
            BusCore core(BusConfig{32, 2});
            // empty fifo + irq_on_empty drives the line high
            if (tx) core.tx(0).write_control(ctrl::kIrqEmpty);
            if (rx) core.rx(1).write_control(ctrl::kIrqEmpty);
            const InterruptState s = core.aggregate_interrupts();
            if (s.int_out != (rx || tx) || s.int_out_rx != (rx == 1) || s.int_out_tx != (tx == 1)) {
                aggregate = false;
            }
        }
    }
    c.check("int_out is OR of rx and tx lines", aggregate);
}

void bus_checks(Checker& c) {
    std::string snaps[3];
    unsigned widths[3] = {8, 16, 32};
    for (int i = 0; i < 3; ++i) {
        BusCore core(BusConfig{widths[i], 2});
        auto write = [&](uint16_t addr, uint32_t value) {
            const unsigned beats = core.beats_for(addr);
            for (unsigned b = 0; b < beats; ++b) {
                core.cpu_access({AccessKind::Write, addr,
                                 (value >> (b * widths[i])) &
                                     (widths[i] >= 32 ? 0xFFFFFFFFu : ((1u << widths[i]) - 1))});
            }
        };
        write(make_address(0, kOffTxControl), ctrl::kEnable | ctrl::kParityEnable);
        write(make_address(0, kOffTxFifo), 0x12345678u);
        write(make_address(0, kOffTxFifo), 0x00000013u);
        write(make_address(1, kOffRxControl), ctrl::kEnable);
        write(make_address(1, kOffLabelIndex), 0xC8);
        write(make_address(1, kOffLabelEnable), 1);
        write(make_address(0, kOffTxFifoLevel), 5);
        snaps[i] = core.state_snapshot();
    }
    c.check("width independence", snaps[0] == snaps[1] && snaps[1] == snaps[2]);

    BusCore core(BusConfig{8, 1});
    BusTransaction txn{AccessKind::Read, make_address(0, kOffRxFifo), 0};
    const AccessResult r0 = core.cpu_access(txn);
    const AccessResult r1 = core.cpu_access(txn);
    const AccessResult r2 = core.cpu_access(txn);
    const AccessResult r3 = core.cpu_access(txn);
    c.check("rx fifo read needs four beats at width 8",
            r0.wait_beats == 3 && r1.wait_beats == 2 && r2.wait_beats == 1 && r3.wait_beats == 0);
}

void simulator_checks(Checker& c) {
    const char* script_text =
        "WRITE 0x00 0x03\n"
        "WRITE 0x03 0x03\n"
        "WRITE 0x02 0x00000000\n"
        "WRITE 0x02 0x12345678\n"
        "WRITE 0x02 0x00000013\n";
    BusConfig bus{32, 1};
    Topology topo{{Wire{0, {0}}}};
    const ParsedScript script = parse_script(script_text);
    const SimulationReport a = run_simulation(bus, topo, script, {});
    const SimulationReport b = run_simulation(bus, topo, script, {});
    c.check("simulation determinism", a.doc.dump() == b.doc.dump());

    const auto& rx = a.doc["channels"][0]["rx"];
    c.check("loopback conservation",
            rx["received_words"].size() == 3 && rx["fifo"].size() == 3,
            "received " + std::to_string(rx["received_words"].size()));

    bool tiles = true;
    int64_t at = 0;
    for (const auto& span : a.doc["wires"][0]["trace"]) {
        if (span[0].get<int64_t>() != at) tiles = false;
        at += span[1].get<int64_t>();
    }
    c.check("trace tiles the run", tiles && at == a.doc["duration_ns"].get<int64_t>());
}

}  // namespace

SelftestResult run_selftest() {
    Checker c;
    codec_checks(c);
    line_coding_checks(c);
    fifo_checks(c);
    interrupt_checks(c);
    bus_checks(c);
    simulator_checks(c);
    return c.result;
}

}  // namespace arinc429
