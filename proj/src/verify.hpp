#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fieno::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // measured value vs tolerance
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    bool passed() const;
};

// Available property suites:
//   rff      — circle projection identity, kernel concentration
//   autodiff — finite-difference checks for every primitive and the full
//              training loss on a micro model
//   oracle   — fundamental-solutions accuracy, truth-mode agreement,
//              manufactured-solution residuals, Neumann compatibility
const std::vector<std::string>& suite_names();

SuiteResult run_suite(const std::string& name, uint64_t seed);
std::vector<SuiteResult> run_all(uint64_t seed);

// One "[PASS]/[FAIL] suite/check: detail" line per check plus a summary.
std::string report(const std::vector<SuiteResult>& suites);

}  // namespace fieno::verify
