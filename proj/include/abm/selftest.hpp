#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace abm::selftest {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Property suite runnable from the CLI: utility-function bounds and
/// identities, Gini against the pairwise-difference oracle, payoff-form
/// agreement and dominant-strategy monotonicity, and the analytic-vs-
/// finite-difference gradient check.
std::vector<CheckResult> run_selftest(std::uint64_t seed);

}  // namespace abm::selftest
