#include "abm/values.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace abm {

namespace {

void check_unit_interval(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must be in [0,1], got " +
                                    std::to_string(x));
    }
}

}  // namespace

void validate(const PersonalValues& v) {
    check_unit_interval(v.si, "si");
    check_unit_interval(v.al, "al");
    check_unit_interval(v.co, "co");
    check_unit_interval(v.fa, "fa");
}

void validate(const UtilityInputs& in) {
    check_unit_interval(in.p_s, "p_s");
    check_unit_interval(in.p_o, "p_o");
    check_unit_interval(in.gini, "gini");
}

double proportion(double p_s, double p_o) {
    check_unit_interval(p_s, "p_s");
    check_unit_interval(p_o, "p_o");
    if (p_s == p_o) return 1.0;  // covers the degenerate 0/0 case
    return std::min(p_s, p_o) / std::max(p_s, p_o);
}

double gini(std::span<const double> payoffs) {
    if (payoffs.empty()) throw std::invalid_argument("gini: empty payoff vector");
    double sum = 0.0;
    for (double x : payoffs) {
        if (!(x >= 0.0)) throw std::invalid_argument("gini: negative payoff");
        sum += x;
    }
    if (sum == 0.0) return 0.0;

    // Sorted form of sum_ij |x_i-x_j| / (2 n^2 mu); the O(n^2) pairwise sum
    // is kept as an independent oracle in the test suites.
    std::vector<double> sorted(payoffs.begin(), payoffs.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
    }
    return weighted / (n * sum);
}

UtilityBreakdown utility(const PersonalValues& v, const UtilityInputs& in, double lambda) {
    validate(v);
    validate(in);
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

    UtilityBreakdown b;
    b.lambda = lambda;
    b.prop = proportion(in.p_s, in.p_o);
    b.cost_si = std::max(0.0, v.si - in.p_s);
    b.cost_al = std::max(0.0, v.al - in.p_o);
    b.cost_co = std::max(0.0, v.co - b.prop);
    b.reward = v.fa * (1.0 - in.gini) + (1.0 - v.fa) * in.p_s;
    b.total = -lambda * (b.cost_si + b.cost_al + b.cost_co) + b.reward;
    return b;
}

double normalize_payoff(double raw, double max_payoff) {
    if (!(max_payoff > 0.0)) throw std::invalid_argument("max_payoff must be positive");
    constexpr double kSlack = 1e-9;  // absorbs float noise in payoff arithmetic
    if (!(raw >= -kSlack && raw <= max_payoff + kSlack)) {
        throw std::invalid_argument("payoff " + std::to_string(raw) +
                                    " outside [0, " + std::to_string(max_payoff) + "]");
    }
    return std::clamp(raw / max_payoff, 0.0, 1.0);
}

}  // namespace abm
