// simulator.hpp -- event-driven bus simulator: wires transmitter outputs to
// receiver inputs, applies stimulus-script CPU directives, injects line
// faults, and produces a deterministic JSON report plus per-wire traces.
//
// Time is integer nanoseconds. At each event time t, in order:
//   1. every wire feeds its receivers the mixed line intervals that end at
//      or before t (intervals are delimited by span boundaries only, never
//      split at event times),
//   2. script directives scheduled at t run in script order,
//   3. transmit channels are polled; words they start are placed on their
//      wire, with any matching faults applied.
// "New label" semantics fall out of the ordering: a word completing exactly
// at t is filtered by the table as directives strictly before t left it.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arinc429/bus_core.hpp"

namespace arinc429 {

struct Wire {
    unsigned tx = 0;           // driving Tx channel (exactly one per wire)
    std::vector<unsigned> rx;  // listening Rx channels
};

struct Topology {
    std::vector<Wire> wires;
};

enum class FaultKind : uint8_t { FlipBit, TruncateWord, GapViolation };

struct Fault {
    int64_t at_ns = 0;
    FaultKind kind = FaultKind::FlipBit;
    uint32_t word_index = 0;       // FlipBit, TruncateWord: per-wire word ordinal
    unsigned bit = 1;              // FlipBit: ARINC bit 1..32
    unsigned after_bits = 0;       // TruncateWord: bits kept, 0..31
    int64_t shrink_to_bit_times = 0;  // GapViolation: resulting gap, may be negative
};

struct FaultPlan {
    unsigned wire = 0;
    std::vector<Fault> faults;  // at_ns non-decreasing
};

enum class DirectiveKind : uint8_t { Write, Read, ExpectIrq };

struct Directive {
    DirectiveKind kind = DirectiveKind::Write;
    int64_t at_ns = 0;   // absolute time, WAITs folded in
    unsigned line = 0;   // 1-based script line, for diagnostics
    uint16_t address = 0;
    uint32_t value = 0;      // WRITE payload (full word for FIFO ports)
    bool has_expect = false;
    uint32_t expect = 0;     // READ expectation / EXPECT_IRQ level
};

struct ParsedScript {
    std::vector<Directive> directives;
    int64_t end_time_ns = 0;  // script clock after the last directive/WAIT
};

// Script or input-file problem tied to a source line.
struct ScriptError : std::runtime_error {
    unsigned line;
    ScriptError(unsigned line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Runtime abort (unmapped address referenced by a directive).
struct SimulationAbort : std::runtime_error {
    unsigned line;
    SimulationAbort(unsigned line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// WRITE addr value | READ addr [expect] | WAIT ns | EXPECT_IRQ 0|1
// '#' starts a comment; integers are decimal or 0x hex.
ParsedScript parse_script(const std::string& text);

struct SimSetup {
    BusConfig bus;
    Topology topology;
};

// {"cpu_data_width": W, "num_channels": N, "wires": [{"tx": i, "rx": [j...]}]}
SimSetup parse_config(const nlohmann::json& doc);

// {"wires": [{"wire": w, "faults": [{"kind": "...", ...}]}]}
std::vector<FaultPlan> parse_faults(const nlohmann::json& doc);

struct SimulationReport {
    nlohmann::json doc;  // keys sorted; dump() is byte-stable
};

SimulationReport run_simulation(const BusConfig& bus, const Topology& topology,
                                const ParsedScript& script,
                                const std::vector<FaultPlan>& fault_plans);

// CSV trace of one wire: `t_start_ns,duration_ns,level` per span, levels
// {+1, 0, -1, X}, tiling [0, duration_ns] exactly.
std::string emit_trace(const SimulationReport& report, unsigned wire);

}  // namespace arinc429
