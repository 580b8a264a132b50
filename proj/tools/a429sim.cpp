// a429sim -- command-line front end: word encode/decode, bus simulation,
// built-in selftest.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "arinc429/selftest.hpp"
#include "arinc429/simulator.hpp"

namespace {

struct UsageError {
    std::string message;
};

uint64_t parse_int(const std::string& tok, int base, const char* what) {
    size_t pos = 0;
    uint64_t v = 0;
    if (tok.empty() || tok[0] == '-' || tok[0] == '+') {
        throw UsageError{std::string("bad ") + what + " '" + tok + "': parse error at position 0"};
    }
    try {
        v = std::stoull(tok, &pos, base);
    } catch (const std::exception&) {
        throw UsageError{std::string("bad ") + what + " '" + tok + "': parse error at position 0"};
    }
    if (pos != tok.size()) {
        throw UsageError{std::string("bad ") + what + " '" + tok + "': parse error at position " +
                         std::to_string(pos)};
    }
    return v;
}

int cmd_encode(const std::string& label, const std::string& sdi, const std::string& data,
               const std::string& ssm, bool parity) {
    arinc429::WordFields f;
    const uint64_t lab = parse_int(label, 8, "label (octal)");
    const uint64_t sdi_v = parse_int(sdi, 0, "sdi");
    const uint64_t data_v = parse_int(data, 0, "data");
    const uint64_t ssm_v = parse_int(ssm, 0, "ssm");
    if (lab > 0377) throw UsageError{"label out of range (octal 000..377)"};
    if (sdi_v > 3) throw UsageError{"sdi out of range (0..3)"};
    if (data_v > 0x7FFFF) throw UsageError{"data out of range (19 bits)"};
    if (ssm_v > 3) throw UsageError{"ssm out of range (0..3)"};
    f.label = static_cast<uint8_t>(lab);
    f.sdi = static_cast<uint8_t>(sdi_v);
    f.data = static_cast<uint32_t>(data_v);
    f.ssm = static_cast<uint8_t>(ssm_v);
    std::cout << arinc429::to_hex(arinc429::assemble(f, parity)) << "\n";
    return 0;
}

int cmd_decode(const std::string& word_text) {
    const uint64_t raw = parse_int(word_text, 16, "word (hex)");
    if (raw > 0xFFFFFFFFull) throw UsageError{"word exceeds 32 bits"};
    const arinc429::Arinc429Word w{static_cast<uint32_t>(raw)};
    const arinc429::WordFields f = arinc429::disassemble(w);
    std::printf("word   %s\n", arinc429::to_hex(w).c_str());
    std::printf("label  %s (octal)\n", arinc429::label_octal(f.label).c_str());
    std::printf("sdi    %u\n", f.sdi);
    std::printf("data   0x%05X\n", f.data);
    std::printf("ssm    %u\n", f.ssm);
    std::printf("parity %u (%s)\n", f.parity_bit,
                arinc429::check_parity(w) ? "valid" : "invalid");
    return 0;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError{"cannot open '" + path + "'"};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cmd_simulate(const std::string& config_path, const std::string& script_path,
                 const std::string& faults_path, const std::string& out_dir) {
    const nlohmann::json config_doc = nlohmann::json::parse(read_file(config_path));
    const arinc429::SimSetup setup = arinc429::parse_config(config_doc);
    const arinc429::ParsedScript script = arinc429::parse_script(read_file(script_path));
    std::vector<arinc429::FaultPlan> plans;
    if (!faults_path.empty()) {
        plans = arinc429::parse_faults(nlohmann::json::parse(read_file(faults_path)));
    }
    const arinc429::SimulationReport report =
        arinc429::run_simulation(setup.bus, setup.topology, script, plans);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.json", std::ios::binary);
        out << report.doc.dump(2) << "\n";
    }
    for (size_t i = 0; i < setup.topology.wires.size(); ++i) {
        std::ofstream out(out_dir + "/wire" + std::to_string(i) + ".csv", std::ios::binary);
        out << arinc429::emit_trace(report, static_cast<unsigned>(i));
    }
    std::cout << "report: " << out_dir << "/report.json ("
              << report.doc["duration_ns"].get<int64_t>() << " ns simulated)\n";
    return 0;
}

int cmd_selftest() {
    const arinc429::SelftestResult r = arinc429::run_selftest();
    for (const std::string& line : r.lines) std::cout << line << "\n";
    std::cout << r.passed << " passed, " << r.failed << " failed\n";
    return r.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARINC 429 multi-channel core model and bus simulator"};
    app.require_subcommand(1);

    auto* encode = app.add_subcommand("encode", "Assemble a word from fields");
    std::string label = "0", sdi = "0", data = "0", ssm = "0";
    bool parity = false;
    encode->add_option("--label", label, "label, octal");
    encode->add_option("--sdi", sdi, "source/destination identifier");
    encode->add_option("--data", data, "data field, 19 bits");
    encode->add_option("--ssm", ssm, "sign/status matrix");
    encode->add_flag("--parity", parity, "insert odd parity in bit 32");

    auto* decode = app.add_subcommand("decode", "Disassemble a hex word");
    std::string word_text;
    decode->add_option("word", word_text, "32-bit word, hex")->required();

    auto* simulate = app.add_subcommand("simulate", "Run a bus simulation");
    std::string config_path, script_path, faults_path, out_dir;
    simulate->add_option("--config", config_path, "config JSON")->required();
    simulate->add_option("--script", script_path, "stimulus script")->required();
    simulate->add_option("--faults", faults_path, "fault plan JSON");
    simulate->add_option("--out", out_dir, "output directory")->required();

    auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (encode->parsed()) return cmd_encode(label, sdi, data, ssm, parity);
        if (decode->parsed()) return cmd_decode(word_text);
        if (simulate->parsed()) return cmd_simulate(config_path, script_path, faults_path, out_dir);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.message << "\n";
        return 1;
    } catch (const arinc429::ScriptError& e) {
        std::cerr << "script error: " << e.what() << "\n";
        return 2;
    } catch (const arinc429::SimulationAbort& e) {
        std::cerr << "simulation abort: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
