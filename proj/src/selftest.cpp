#include "abm/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abm/nnet.hpp"
#include "abm/pgg.hpp"
#include "abm/rng.hpp"
#include "abm/values.hpp"

namespace abm::selftest {

namespace {

std::string fmt_exp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

/// Independent O(n^2) route for the Gini coefficient.
double gini_pairwise(const std::vector<double>& x) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    if (mean == 0.0) return 0.0;
    double diff_sum = 0.0;
    for (double a : x) {
        for (double b : x) diff_sum += std::abs(a - b);
    }
    return diff_sum / (2.0 * n * n * mean);
}

CheckResult check_utility_properties(Rng& rng) {
    constexpr int kSamples = 100000;
    constexpr double lambda = kDefaultLambda;
    int dominance_pairs = 0;
    UtilityBreakdown prev;
    bool have_prev = false;
    for (int k = 0; k < kSamples; ++k) {
        PersonalValues v{rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
        UtilityInputs in{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        const UtilityBreakdown b = utility(v, in, lambda);

        if (!(b.total >= -3.0 * lambda && b.total <= 1.0)) {
            return {"utility properties", false, "total out of [-30,1]: " + std::to_string(b.total)};
        }
        if (proportion(in.p_s, in.p_o) != proportion(in.p_o, in.p_s)) {
            return {"utility properties", false, "proportion not symmetric"};
        }
        PersonalValues fa0 = v;
        fa0.fa = 0.0;
        PersonalValues fa1 = v;
        fa1.fa = 1.0;
        if (std::abs(utility(fa0, in, lambda).reward - in.p_s) > 1e-12 ||
            std::abs(utility(fa1, in, lambda).reward - (1.0 - in.gini)) > 1e-12) {
            return {"utility properties", false, "fa endpoint identity violated"};
        }

        // Cost dominance: componentwise smaller costs with a gap > 0.1
        // somewhere must win regardless of rewards.
        if (have_prev) {
            const UtilityBreakdown& a = b.cost_si + b.cost_al + b.cost_co <
                                                prev.cost_si + prev.cost_al + prev.cost_co
                                            ? b
                                            : prev;
            const UtilityBreakdown& c = &a == &b ? prev : b;
            const bool componentwise = a.cost_si <= c.cost_si && a.cost_al <= c.cost_al &&
                                       a.cost_co <= c.cost_co;
            const bool gap = c.cost_si - a.cost_si > 0.1 || c.cost_al - a.cost_al > 0.1 ||
                             c.cost_co - a.cost_co > 0.1;
            if (componentwise && gap) {
                ++dominance_pairs;
                if (!(a.total > c.total)) {
                    return {"utility properties", false, "cost dominance violated"};
                }
            }
        }
        prev = b;
        have_prev = true;
    }
    return {"utility properties", true,
            std::to_string(kSamples) + " samples, " + std::to_string(dominance_pairs) + " dominance pairs"};
}

CheckResult check_gini_oracle(Rng& rng) {
    constexpr int kVectors = 1000;
    for (int k = 0; k < kVectors; ++k) {
        const int n = rng.uniform_int(1, 12);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& v : x) v = rng.uniform_real(0.0, 50.0);
        if (std::abs(gini(x) - gini_pairwise(x)) > 1e-12) {
            return {"gini oracle", false, "sorted form disagrees with pairwise sum"};
        }
    }
    const std::vector<double> spike{1.0, 0.0, 0.0, 0.0};
    if (gini(spike) != 0.75) {
        return {"gini oracle", false, "gini([1,0,0,0]) != 0.75"};
    }
    return {"gini oracle", true, std::to_string(kVectors) + " random vectors vs pairwise oracle"};
}

CheckResult check_payoff_identities() {
    pgg::ScenarioConfig scen;
    const int e = scen.endowment;
    std::vector<int> contribs(4);
    for (contribs[0] = 0; contribs[0] <= e; ++contribs[0]) {
        for (contribs[1] = 0; contribs[1] <= e; ++contribs[1]) {
            for (contribs[2] = 0; contribs[2] <= e; ++contribs[2]) {
                for (contribs[3] = 0; contribs[3] <= e; ++contribs[3]) {
                    const double sum_form = pgg::payoff(contribs[0], contribs, scen);
                    const double avg_others =
                        static_cast<double>(contribs[1] + contribs[2] + contribs[3]) / 3.0;
                    const double avg_form =
                        pgg::payoff_from_others_average(contribs[0], avg_others, scen);
                    if (std::abs(sum_form - avg_form) > 1e-9) {
                        return {"payoff identities", false, "sum and average forms disagree"};
                    }
                }
            }
        }
    }

    // Dominant strategy: payoff strictly decreasing in own contribution for
    // any fixed contributions of the others.
    for (int others = 0; others <= 3 * e; ++others) {
        double last = std::numeric_limits<double>::infinity();
        for (int own = 0; own <= e; ++own) {
            const double p = pgg::payoff_from_others_average(own, others / 3.0, scen);
            if (!(p < last)) {
                return {"payoff identities", false, "payoff not strictly decreasing in own"};
            }
            last = p;
        }
    }

    if (pgg::max_payoff(scen) != 41.0) {
        return {"payoff identities", false, "max_payoff(N=4, f=1.4, 20) != 41"};
    }
    return {"payoff identities", true, "full 21^4 grid, both forms, monotone in own"};
}

CheckResult check_gradients(Rng& rng) {
    constexpr int kCases = 100;
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < kCases; ++k) {
        nnet::NetworkConfig cfg;
        cfg.input_dim = rng.uniform_int(1, 4);
        cfg.hidden_units = rng.uniform_int(1, 8);
        cfg.rng_seed = rng.next_u64();
        nnet::Network net = nnet::init_network(cfg);
        std::vector<double> input(static_cast<std::size_t>(cfg.input_dim));
        for (double& v : input) v = rng.uniform_real(-1.0, 1.0);
        const double target = rng.uniform_real(-1.0, 1.0);
        const nnet::Network analytic = nnet::gradient(net, input, target);

        auto loss = [&](const nnet::Network& n) {
            const double r = nnet::forward(n, input) - target;
            return r * r;
        };
        auto check_param = [&](double& param, double analytic_grad) {
            const double saved = param;
            param = saved + h;
            const double up = loss(net);
            param = saved - h;
            const double down = loss(net);
            param = saved;
            const double fd = (up - down) / (2.0 * h);
            const double rel = std::abs(analytic_grad - fd) /
                               std::max({std::abs(analytic_grad), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
            return rel < 1e-4;
        };

        for (std::size_t i = 0; i < net.weights_hidden.size(); ++i) {
            if (!check_param(net.weights_hidden[i], analytic.weights_hidden[i])) {
                return {"gradient check", false, "hidden weight mismatch, rel " + fmt_exp(worst)};
            }
        }
        for (std::size_t i = 0; i < net.bias_hidden.size(); ++i) {
            if (!check_param(net.bias_hidden[i], analytic.bias_hidden[i])) {
                return {"gradient check", false, "hidden bias mismatch, rel " + fmt_exp(worst)};
            }
        }
        for (std::size_t i = 0; i < net.weights_out.size(); ++i) {
            if (!check_param(net.weights_out[i], analytic.weights_out[i])) {
                return {"gradient check", false, "output weight mismatch, rel " + fmt_exp(worst)};
            }
        }
        if (!check_param(net.bias_out, analytic.bias_out)) {
            return {"gradient check", false, "output bias mismatch, rel " + fmt_exp(worst)};
        }
    }
    return {"gradient check", true, std::to_string(kCases) + " cases, worst rel error " + fmt_exp(worst)};
}

}  // namespace

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5E1F));
    std::vector<CheckResult> results;
    results.push_back(check_utility_properties(rng));
    results.push_back(check_gini_oracle(rng));
    results.push_back(check_payoff_identities());
    results.push_back(check_gradients(rng));
    return results;
}

}  // namespace abm::selftest
