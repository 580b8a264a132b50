// selftest.hpp -- built-in invariant suites for the `selftest` subcommand.
// Quick deterministic checks over every module; the full property suites
// live in the test binaries.

#pragma once

#include <string>
#include <vector>

namespace arinc429 {

struct SelftestResult {
    unsigned passed = 0;
    unsigned failed = 0;
    std::vector<std::string> lines;  // "ok name" or "FAIL name: detail"

    bool all_passed() const { return failed == 0; }
};

SelftestResult run_selftest();

}  // namespace arinc429
