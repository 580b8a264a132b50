#include "arinc429/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>
#include <sstream>

namespace arinc429 {

using nlohmann::json;

namespace {

// ---- script parsing ----

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

uint64_t parse_uint(const std::string& tok, unsigned line, const char* what) {
    size_t pos = 0;
    uint64_t v = 0;
    if (tok.empty() || tok[0] == '-' || tok[0] == '+') {
        throw ScriptError(line, std::string("bad ") + what + " '" + tok + "'");
    }
    try {
        v = std::stoull(tok, &pos, 0);  // base 0: decimal or 0x hex
    } catch (const std::exception&) {
        throw ScriptError(line, std::string("bad ") + what + " '" + tok + "'");
    }
    if (pos != tok.size()) {
        throw ScriptError(line, std::string("bad ") + what + " '" + tok +
                                    "' (junk at position " + std::to_string(pos) + ")");
    }
    return v;
}

// ---- fault bookkeeping ----

const char* fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::FlipBit: return "flip_bit";
        case FaultKind::TruncateWord: return "truncate_word";
        case FaultKind::GapViolation: return "gap_violation";
    }
    return "?";
}

const char* outcome_name(AccessOutcome o) {
    switch (o) {
        case AccessOutcome::Ok: return "ok";
        case AccessOutcome::UnmappedAddress: return "unmapped_address";
        case AccessOutcome::WriteOnlyRead: return "write_only_read";
        case AccessOutcome::ReadOnlyWrite: return "read_only_write";
        case AccessOutcome::FifoUnderflow: return "fifo_underflow";
        case AccessOutcome::FifoOverflow: return "fifo_overflow";
        case AccessOutcome::ProtocolViolation: return "protocol_violation";
    }
    return "?";
}

const char* notification_name(RxChannel::Notification::Kind k) {
    using K = RxChannel::Notification::Kind;
    switch (k) {
        case K::WordStored: return "word_stored";
        case K::WordDroppedParity: return "word_dropped_parity";
        case K::WordDroppedFilter: return "word_dropped_filter";
        case K::WordDroppedOverflow: return "word_dropped_overflow";
        case K::LineError: return "line_error";
    }
    return "?";
}

const char* rx_error_name(RxErrorKind e) {
    switch (e) {
        case RxErrorKind::RzViolation: return "rz_violation";
        case RxErrorKind::ShortWord: return "short_word";
        case RxErrorKind::LongWord: return "long_word";
    }
    return "?";
}

struct TraceSpan {
    int64_t t_start_ns = 0;
    int64_t duration_ns = 0;
    LineLevel level = LineLevel::Null;
    bool fill = false;  // idle fill, mergeable with adjacent fill
};

struct ReceivedWord {
    int64_t t_ns = 0;
    uint32_t word = 0;
};

// One wire of the bus: the schedule of spans its transmitter has placed on
// it, how far receivers have consumed, and the trace so far.
struct WireState {
    unsigned tx = 0;
    std::vector<unsigned> rx;
    std::vector<TimedSpan> pending;  // sorted by t_start; overlaps only from faults
    int64_t fed_until_ns = 0;
    int64_t coverage_end_ns = 0;  // max scheduled span end
    std::vector<TraceSpan> trace;
    std::vector<Fault> faults;
};

struct Engine {
    BusCore core;
    std::vector<WireState> wires;
    std::vector<int> wire_of_tx;  // channel -> wire index or -1

    json events = json::array();
    json irq_edges = json::array();
    json expect_results = json::array();
    json faults_applied = json::array();
    std::vector<std::vector<ReceivedWord>> received;  // per rx channel

    InterruptState last_irq;  // all-low baseline; only changes are recorded

    explicit Engine(const BusConfig& cfg) : core(cfg) {}

    void note_irq(int64_t t) {
        const InterruptState s = core.aggregate_interrupts();
        if (s == last_irq) return;
        last_irq = s;
        irq_edges.push_back({{"int_out", s.int_out},
                             {"int_out_rx", s.int_out_rx},
                             {"int_out_tx", s.int_out_tx},
                             {"t_ns", t}});
    }

    void record_notification(int64_t t, unsigned wire, unsigned channel,
                             const RxChannel::Notification& n) {
        json e = {{"channel", channel},
                  {"kind", notification_name(n.kind)},
                  {"t_ns", t},
                  {"wire", wire}};
        if (n.kind == RxChannel::Notification::Kind::LineError) {
            e["error"] = rx_error_name(n.error);
        } else {
            e["word"] = to_hex(n.word);
        }
        events.push_back(std::move(e));
        if (n.kind == RxChannel::Notification::Kind::WordStored) {
            received[channel].push_back({t, n.word.raw});
        }
    }

    // Feeds [a, b) at the given level to every receiver on the wire.
    void consume(WireState& w, int64_t a, int64_t b, LineLevel level, bool fill) {
        for (unsigned r : w.rx) {
            for (const auto& n : core.rx(r).feed(level, b - a)) {
                record_notification(b, static_cast<unsigned>(&w - wires.data()), r, n);
            }
        }
        note_irq(b);
        if (fill && !w.trace.empty() && w.trace.back().fill &&
            w.trace.back().t_start_ns + w.trace.back().duration_ns == a) {
            w.trace.back().duration_ns += b - a;
        } else {
            w.trace.push_back({a, b - a, level, fill});
        }
    }

    // Consumes every elementary interval of the wire ending at or before t.
    // Intervals are delimited by span boundaries; a trailing uncovered
    // stretch stays open (it is closed by the next span or the final flush).
    void feed_wire(WireState& w, int64_t t) {
        for (;;) {
            std::erase_if(w.pending, [&](const TimedSpan& s) {
                return s.t_start_ns + s.duration_ns <= w.fed_until_ns;
            });
            LineLevel level = LineLevel::Null;
            bool covered = false;
            int64_t b = std::numeric_limits<int64_t>::max();
            for (const TimedSpan& s : w.pending) {
                const int64_t end = s.t_start_ns + s.duration_ns;
                if (s.t_start_ns <= w.fed_until_ns) {
                    covered = true;
                    level = mix_levels(level, s.level);
                    b = std::min(b, end);
                } else {
                    b = std::min(b, s.t_start_ns);
                }
            }
            if (b == std::numeric_limits<int64_t>::max() || b > t) return;
            consume(w, w.fed_until_ns, b, covered ? level : LineLevel::Null, !covered);
            w.fed_until_ns = b;
        }
    }

    // Applies matching faults to a freshly emitted word block, then adds its
    // spans to the wire schedule.
    void schedule_block(WireState& w, std::vector<TimedSpan> block, uint32_t ordinal) {
        const int64_t block_start = block.empty() ? 0 : block.front().t_start_ns;
        const unsigned wire_index = static_cast<unsigned>(&w - wires.data());
        for (auto it = w.faults.begin(); it != w.faults.end();) {
            bool applied = false;
            switch (it->kind) {
                case FaultKind::FlipBit:
                    if (it->word_index == ordinal) {
                        const size_t idx = 2 * (it->bit - 1);
                        if (idx < block.size()) {
                            TimedSpan& s = block[idx];
                            s.level = s.level == LineLevel::Hi ? LineLevel::Lo : LineLevel::Hi;
                        }
                        applied = true;
                    }
                    break;
                case FaultKind::TruncateWord:
                    if (it->word_index == ordinal) {
                        block.resize(std::min<size_t>(block.size(), 2 * it->after_bits));
                        applied = true;
                    }
                    break;
                case FaultKind::GapViolation:
                    if (block_start >= it->at_ns && !block.empty()) {
                        // Delaying this word shrinks the gap between it and
                        // the next word, which stays on schedule.
                        const int64_t bp = 2 * block.front().duration_ns;
                        const int64_t delta = (kGapBitTimes - it->shrink_to_bit_times) * bp;
                        for (TimedSpan& s : block) s.t_start_ns += delta;
                        applied = true;
                    }
                    break;
            }
            if (applied) {
                faults_applied.push_back({{"kind", fault_kind_name(it->kind)},
                                          {"t_ns", block_start},
                                          {"wire", wire_index},
                                          {"word_index", ordinal}});
                it = w.faults.erase(it);
            } else {
                ++it;
            }
        }
        for (const TimedSpan& s : block) {
            w.coverage_end_ns = std::max(w.coverage_end_ns, s.t_start_ns + s.duration_ns);
        }
        w.pending.insert(w.pending.end(), block.begin(), block.end());
        std::stable_sort(w.pending.begin(), w.pending.end(),
                         [](const TimedSpan& a, const TimedSpan& b) {
                             return a.t_start_ns < b.t_start_ns;
                         });
    }

    // Drains every Tx serializer at time t and routes word blocks to wires.
    void poll_transmitters(int64_t t) {
        for (unsigned ch = 0; ch < core.config().num_channels; ++ch) {
            std::vector<TimedSpan> block;
            uint32_t ordinal = 0;
            auto flush = [&]() {
                if (block.empty()) return;
                if (wire_of_tx[ch] >= 0) {
                    schedule_block(wires[wire_of_tx[ch]], std::move(block), ordinal);
                }
                block.clear();
            };
            while (auto e = core.tx(ch).tick(t)) {
                if (!block.empty() && e->word_ordinal != ordinal) flush();
                ordinal = e->word_ordinal;
                block.push_back({e->t_start_ns, e->duration_ns, e->level});
            }
            flush();
        }
        note_irq(t);
    }

    void execute(const Directive& d) {
        const unsigned beats = core.beats_for(d.address);
        const unsigned width = core.config().cpu_data_width;
        const uint32_t mask =
            width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
        uint32_t assembled = 0;
        if (d.kind == DirectiveKind::ExpectIrq) {
            const bool actual = core.aggregate_interrupts().int_out;
            expect_results.push_back({{"actual", actual},
                                      {"expected", d.expect != 0},
                                      {"kind", "irq"},
                                      {"line", d.line},
                                      {"pass", actual == (d.expect != 0)},
                                      {"t_ns", d.at_ns}});
            return;
        }
        for (unsigned beat = 0; beat < beats; ++beat) {
            BusTransaction txn;
            txn.kind = d.kind == DirectiveKind::Write ? AccessKind::Write : AccessKind::Read;
            txn.address = d.address;
            txn.data = (d.value >> (beat * width)) & mask;
            const AccessResult r = core.cpu_access(txn);
            if (r.outcome == AccessOutcome::UnmappedAddress) {
                std::ostringstream os;
                os << "unmapped address 0x" << std::hex << d.address;
                throw SimulationAbort(d.line, os.str());
            }
            if (r.outcome != AccessOutcome::Ok) {
                events.push_back({{"address", d.address},
                                  {"kind", std::string("bus_") + outcome_name(r.outcome)},
                                  {"line", d.line},
                                  {"t_ns", d.at_ns}});
            }
            if (r.data) assembled |= (*r.data & mask) << (beat * width);
        }
        if (d.kind == DirectiveKind::Read && d.has_expect) {
            expect_results.push_back({{"actual", assembled},
                                      {"address", d.address},
                                      {"expected", d.expect},
                                      {"kind", "read"},
                                      {"line", d.line},
                                      {"pass", assembled == d.expect},
                                      {"t_ns", d.at_ns}});
        }
        note_irq(d.at_ns);
    }
};

}  // namespace

ParsedScript parse_script(const std::string& text) {
    ParsedScript out;
    std::istringstream is(text);
    std::string raw;
    unsigned line = 0;
    int64_t clock = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto tok = tokenize(raw);
        if (tok.empty()) continue;
        const std::string& op = tok[0];
        Directive d;
        d.at_ns = clock;
        d.line = line;
        if (op == "WAIT") {
            if (tok.size() != 2) throw ScriptError(line, "WAIT takes one argument");
            const uint64_t ns = parse_uint(tok[1], line, "duration");
            if (ns == 0) throw ScriptError(line, "WAIT duration must be positive");
            clock += static_cast<int64_t>(ns);
            continue;
        }
        if (op == "WRITE") {
            if (tok.size() != 3) throw ScriptError(line, "WRITE takes address and value");
            d.kind = DirectiveKind::Write;
            const uint64_t addr = parse_uint(tok[1], line, "address");
            if (addr >= 512) throw ScriptError(line, "address must be < 512");
            d.address = static_cast<uint16_t>(addr);
            const uint64_t value = parse_uint(tok[2], line, "value");
            if (value > 0xFFFFFFFFull) throw ScriptError(line, "value exceeds 32 bits");
            d.value = static_cast<uint32_t>(value);
        } else if (op == "READ") {
            if (tok.size() != 2 && tok.size() != 3) {
                throw ScriptError(line, "READ takes address and optional expectation");
            }
            d.kind = DirectiveKind::Read;
            const uint64_t addr = parse_uint(tok[1], line, "address");
            if (addr >= 512) throw ScriptError(line, "address must be < 512");
            d.address = static_cast<uint16_t>(addr);
            if (tok.size() == 3) {
                const uint64_t expect = parse_uint(tok[2], line, "expectation");
                if (expect > 0xFFFFFFFFull) throw ScriptError(line, "expectation exceeds 32 bits");
                d.has_expect = true;
                d.expect = static_cast<uint32_t>(expect);
            }
        } else if (op == "EXPECT_IRQ") {
            if (tok.size() != 2) throw ScriptError(line, "EXPECT_IRQ takes 0 or 1");
            const uint64_t level = parse_uint(tok[1], line, "level");
            if (level > 1) throw ScriptError(line, "EXPECT_IRQ level must be 0 or 1");
            d.kind = DirectiveKind::ExpectIrq;
            d.has_expect = true;
            d.expect = static_cast<uint32_t>(level);
        } else {
            throw ScriptError(line, "unknown directive '" + op + "'");
        }
        out.directives.push_back(d);
    }
    out.end_time_ns = clock;
    return out;
}

SimSetup parse_config(const json& doc) {
    SimSetup s;
    s.bus.cpu_data_width = doc.at("cpu_data_width").get<unsigned>();
    s.bus.num_channels = doc.at("num_channels").get<unsigned>();
    if (doc.contains("wires")) {
        for (const json& w : doc.at("wires")) {
            Wire wire;
            wire.tx = w.at("tx").get<unsigned>();
            for (const json& r : w.at("rx")) wire.rx.push_back(r.get<unsigned>());
            s.topology.wires.push_back(std::move(wire));
        }
    }
    return s;
}

std::vector<FaultPlan> parse_faults(const json& doc) {
    std::vector<FaultPlan> plans;
    if (!doc.is_object()) {
        throw std::invalid_argument("fault plan must be an object with a \"wires\" array");
    }
    if (!doc.contains("wires")) return plans;
    for (const json& w : doc.at("wires")) {
        FaultPlan plan;
        plan.wire = w.at("wire").get<unsigned>();
        int64_t prev_at = 0;
        for (const json& f : w.at("faults")) {
            Fault fault;
            fault.at_ns = f.value("at_ns", int64_t{0});
            if (fault.at_ns < prev_at) {
                throw std::invalid_argument("fault timestamps must be non-decreasing");
            }
            prev_at = fault.at_ns;
            const std::string kind = f.at("kind").get<std::string>();
            if (kind == "flip_bit") {
                fault.kind = FaultKind::FlipBit;
                fault.word_index = f.at("word_index").get<uint32_t>();
                fault.bit = f.at("bit").get<unsigned>();
                if (fault.bit < 1 || fault.bit > 32) {
                    throw std::invalid_argument("flip_bit bit must be 1..32");
                }
            } else if (kind == "truncate_word") {
                fault.kind = FaultKind::TruncateWord;
                fault.word_index = f.at("word_index").get<uint32_t>();
                fault.after_bits = f.at("after_bits").get<unsigned>();
                if (fault.after_bits > 31) {
                    throw std::invalid_argument("truncate_word after_bits must be 0..31");
                }
            } else if (kind == "gap_violation") {
                fault.kind = FaultKind::GapViolation;
                fault.shrink_to_bit_times = f.at("shrink_to_bit_times").get<int64_t>();
                if (fault.shrink_to_bit_times > kGapBitTimes) {
                    throw std::invalid_argument("gap_violation cannot widen the gap");
                }
            } else {
                throw std::invalid_argument("unknown fault kind '" + kind + "'");
            }
            plan.faults.push_back(fault);
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

SimulationReport run_simulation(const BusConfig& bus, const Topology& topology,
                                const ParsedScript& script,
                                const std::vector<FaultPlan>& fault_plans) {
    Engine eng(bus);
    eng.received.resize(bus.num_channels);
    eng.wire_of_tx.assign(bus.num_channels, -1);

    std::set<unsigned> rx_used;
    for (const Wire& w : topology.wires) {
        if (w.tx >= bus.num_channels) throw std::invalid_argument("wire tx out of range");
        if (eng.wire_of_tx[w.tx] >= 0) {
            throw std::invalid_argument("a transmitter may drive only one wire");
        }
        for (unsigned r : w.rx) {
            if (r >= bus.num_channels) throw std::invalid_argument("wire rx out of range");
            if (!rx_used.insert(r).second) {
                throw std::invalid_argument("a receiver may listen to only one wire");
            }
        }
        eng.wire_of_tx[w.tx] = static_cast<int>(eng.wires.size());
        WireState ws;
        ws.tx = w.tx;
        ws.rx = w.rx;
        eng.wires.push_back(std::move(ws));
    }
    for (const FaultPlan& plan : fault_plans) {
        if (plan.wire >= eng.wires.size()) throw std::invalid_argument("fault wire out of range");
        auto& dst = eng.wires[plan.wire].faults;
        dst.insert(dst.end(), plan.faults.begin(), plan.faults.end());
    }

    // Directives are already time-sorted (WAIT only moves the clock forward).
    size_t next_directive = 0;
    for (;;) {
        int64_t t = std::numeric_limits<int64_t>::max();
        if (next_directive < script.directives.size()) {
            t = script.directives[next_directive].at_ns;
        }
        for (unsigned ch = 0; ch < bus.num_channels; ++ch) {
            const TxChannel& tx = eng.core.tx(ch);
            if ((tx.control() & ctrl::kEnable) && !tx.fifo().flags().empty) {
                t = std::min(t, tx.line_free_at());
            }
        }
        if (t == std::numeric_limits<int64_t>::max()) break;

        for (WireState& w : eng.wires) eng.feed_wire(w, t);
        while (next_directive < script.directives.size() &&
               script.directives[next_directive].at_ns == t) {
            eng.execute(script.directives[next_directive]);
            ++next_directive;
        }
        eng.poll_transmitters(t);
    }

    int64_t t_end = script.end_time_ns;
    for (const WireState& w : eng.wires) t_end = std::max(t_end, w.coverage_end_ns);
    for (WireState& w : eng.wires) {
        eng.feed_wire(w, t_end);
        if (w.fed_until_ns < t_end) {
            eng.consume(w, w.fed_until_ns, t_end, LineLevel::Null, true);
            w.fed_until_ns = t_end;
        }
    }
    eng.note_irq(t_end);

    json channels = json::array();
    for (unsigned ch = 0; ch < bus.num_channels; ++ch) {
        const TxChannel& tx = eng.core.tx(ch);
        const RxChannel& rx = eng.core.rx(ch);
        json tx_fifo = json::array();
        for (Arinc429Word w : tx.fifo().contents()) tx_fifo.push_back(to_hex(w));
        json rx_fifo = json::array();
        for (Arinc429Word w : rx.fifo().contents()) rx_fifo.push_back(to_hex(w));
        json labels = json::array();
        for (unsigned lab = 0; lab < 256; ++lab) {
            if (rx.label_enabled(static_cast<uint8_t>(lab))) labels.push_back(lab);
        }
        json words = json::array();
        for (const ReceivedWord& rw : eng.received[ch]) {
            words.push_back({{"t_ns", rw.t_ns}, {"word", to_hex(Arinc429Word{rw.word})}});
        }
        channels.push_back(
            {{"index", ch},
             {"rx",
              {{"control", rx.control()},
               {"fifo", std::move(rx_fifo)},
               {"labels_enabled", std::move(labels)},
               {"received_words", std::move(words)},
               {"status", rx.peek_status()}}},
             {"tx",
              {{"control", tx.control()},
               {"fifo", std::move(tx_fifo)},
               {"status", tx.peek_status()},
               {"words_started", tx.words_started()}}}});
    }

    json wires = json::array();
    for (const WireState& w : eng.wires) {
        json trace = json::array();
        for (const TraceSpan& s : w.trace) {
            trace.push_back({s.t_start_ns, s.duration_ns, std::string(level_token(s.level))});
        }
        wires.push_back({{"rx", w.rx}, {"trace", std::move(trace)}, {"tx", w.tx}});
    }

    SimulationReport report;
    report.doc = {{"channels", std::move(channels)},
                  {"config",
                   {{"cpu_data_width", bus.cpu_data_width}, {"num_channels", bus.num_channels}}},
                  {"duration_ns", t_end},
                  {"events", std::move(eng.events)},
                  {"expect_results", std::move(eng.expect_results)},
                  {"faults_applied", std::move(eng.faults_applied)},
                  {"irq_edges", std::move(eng.irq_edges)},
                  {"wires", std::move(wires)}};
    return report;
}

std::string emit_trace(const SimulationReport& report, unsigned wire) {
    const json& wires = report.doc.at("wires");
    if (wire >= wires.size()) throw std::out_of_range("no such wire");
    std::ostringstream os;
    for (const json& span : wires[wire].at("trace")) {
        os << span[0].get<int64_t>() << ',' << span[1].get<int64_t>() << ','
           << span[2].get<std::string>() << '\n';
    }
    return os.str();
}

}  // namespace arinc429
