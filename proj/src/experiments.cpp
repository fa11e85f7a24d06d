#include "abm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace abm::experiments {

namespace {

constexpr int kCurvePoints = 21;

std::string format_al(double al) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", al);
    return buf;
}

/// Rounds a population up to the next multiple of the group size by
/// repeating the last profile's values. Curves are only reported for the
/// originally requested agents, padding agents just fill the groups.
std::vector<PersonalValues> expand_profiles(std::span<const StrategyProfile> profiles,
                                            int group_size, int* requested_out) {
    std::vector<PersonalValues> values;
    for (const StrategyProfile& p : profiles) {
        if (p.count < 0) throw std::invalid_argument("profile count must be >= 0");
        for (int k = 0; k < p.count; ++k) values.push_back(p.values);
    }
    if (values.empty()) throw std::invalid_argument("no agents in profile list");
    if (requested_out) *requested_out = static_cast<int>(values.size());
    while (values.size() % static_cast<std::size_t>(group_size) != 0) {
        values.push_back(values.back());
    }
    return values;
}

std::vector<double> ranks_with_ties(std::span<const double> v) {
    const auto n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double curve_mean(std::span<const double> curve) {
    return std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
}

std::vector<double> to_double_curve(const engine::ResponseCurve& curve) {
    return {curve.begin(), curve.end()};
}

double mean_contribution(std::span<const engine::ResponseCurve> curves) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& c : curves) {
        total += std::accumulate(c.begin(), c.end(), 0.0);
        n += c.size();
    }
    return total / static_cast<double>(n);
}

double max_pairwise_difference(std::span<const engine::ResponseCurve> curves) {
    double worst = 0.0;
    for (std::size_t a = 0; a < curves.size(); ++a) {
        for (std::size_t b = a + 1; b < curves.size(); ++b) {
            for (std::size_t x = 0; x < curves[a].size(); ++x) {
                worst = std::max(worst, std::abs(static_cast<double>(curves[a][x] - curves[b][x])));
            }
        }
    }
    return worst;
}

}  // namespace

std::string to_string(StrategyLabel label) {
    switch (label) {
        case StrategyLabel::free_rider: return "free_rider";
        case StrategyLabel::conditional_cooperator: return "conditional_cooperator";
        case StrategyLabel::hump_shaped: return "hump_shaped";
        case StrategyLabel::other: return "other";
    }
    return "other";
}

StrategyProfile free_rider_profile(int count) {
    return {"free_rider", {.si = 1.0, .al = 0.0, .co = 0.0, .fa = 0.0}, count};
}

StrategyProfile hump_shaped_profile(int count) {
    return {"hump_shaped", {.si = 0.5, .al = 0.5, .co = 0.0, .fa = 0.0}, count};
}

StrategyProfile conditional_cooperator_profile(int count) {
    return {"conditional_cooperator", {.si = 0.0, .al = 0.0, .co = 0.8, .fa = 0.0}, count};
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman: need two equally sized series");
    }
    const std::vector<double> rx = ranks_with_ties(x);
    const std::vector<double> ry = ranks_with_ties(y);
    return pearson(rx, ry);
}

StrategyLabel classify_strategy(std::span<const double> curve, const ClassifierConfig& cfg) {
    if (curve.size() != kCurvePoints) {
        throw std::invalid_argument("classify_strategy expects a 21-point curve");
    }
    if (curve_mean(curve) <= cfg.free_rider_mean_max) return StrategyLabel::free_rider;

    std::vector<double> xs(curve.size());
    std::iota(xs.begin(), xs.end(), 0.0);
    if (spearman(xs, curve) >= cfg.spearman_min && curve[20] >= curve[10]) {
        return StrategyLabel::conditional_cooperator;
    }

    const auto peak_it = std::max_element(curve.begin(), curve.end());  // lowest x on ties
    const auto peak_x = static_cast<int>(peak_it - curve.begin());
    if (peak_x >= cfg.peak_window_lo && peak_x <= cfg.peak_window_hi &&
        curve[20] <= cfg.tail_decay_factor * *peak_it) {
        return StrategyLabel::hump_shaped;
    }
    return StrategyLabel::other;
}

StrategyLabel classify_strategy(const engine::ResponseCurve& curve, const ClassifierConfig& cfg) {
    return classify_strategy(to_double_curve(curve), cfg);
}

const std::vector<double>& ExperimentResult::mean_curve(const std::string& group) const {
    for (const auto& [name, curve] : mean_curves) {
        if (name == group) return curve;
    }
    throw std::out_of_range("no mean curve for group " + group);
}

std::vector<double> mean_curve_of(std::span<const engine::ResponseCurve> curves) {
    if (curves.empty()) throw std::invalid_argument("mean_curve_of: no curves");
    std::vector<double> mean(curves.front().size(), 0.0);
    for (const auto& c : curves) {
        for (std::size_t x = 0; x < mean.size(); ++x) mean[x] += c[x];
    }
    for (double& v : mean) v /= static_cast<double>(curves.size());
    return mean;
}

std::vector<double> std_curve_of(std::span<const engine::ResponseCurve> curves) {
    const std::vector<double> mean = mean_curve_of(curves);
    std::vector<double> sd(mean.size(), 0.0);
    for (const auto& c : curves) {
        for (std::size_t x = 0; x < mean.size(); ++x) {
            const double d = c[x] - mean[x];
            sd[x] += d * d;
        }
    }
    for (double& v : sd) v = std::sqrt(v / static_cast<double>(curves.size()));
    return sd;
}

ExperimentResult sweep_altruism(std::span<const double> al_values, std::uint64_t seed,
                                const ExperimentConfig& cfg, int agents_per_value) {
    if (al_values.empty()) throw std::invalid_argument("sweep needs at least one al value");
    if (agents_per_value < 1) throw std::invalid_argument("agents_per_value must be >= 1");

    ExperimentResult result;
    result.master_seed = seed;
    for (std::size_t k = 0; k < al_values.size(); ++k) {
        const double al = al_values[k];
        const std::string group = format_al(al);
        StrategyProfile profile{group, {.si = 0.5, .al = al, .co = 0.0, .fa = 0.0},
                                agents_per_value};

        int requested = 0;
        const std::vector<PersonalValues> values =
            expand_profiles(std::span(&profile, 1), cfg.scenario.group_size, &requested);
        std::vector<engine::Agent> population = engine::make_population(values);

        engine::PhaseConfig phases = cfg.phases;
        phases.master_seed = derive_seed(seed, k + 1);
        engine::experience_phase(population, cfg.scenario, phases);
        engine::train_population(population, cfg.scenario, phases, cfg.threads);

        std::vector<engine::ResponseCurve> curves;
        curves.reserve(static_cast<std::size_t>(requested));
        for (int i = 0; i < requested; ++i) {
            curves.push_back(engine::response_curve(population[static_cast<std::size_t>(i)],
                                                    cfg.scenario));
            result.curves.push_back({group, population[static_cast<std::size_t>(i)].id,
                                     curves.back()});
        }
        result.mean_curves.emplace_back(group, mean_curve_of(curves));
        result.classifications.emplace_back(group,
                                            classify_strategy(result.mean_curves.back().second));
    }
    return result;
}

ExperimentResult replicate_experiment(std::span<const StrategyProfile> profiles,
                                      std::uint64_t seed, const ExperimentConfig& cfg) {
    int requested = 0;
    const std::vector<PersonalValues> values =
        expand_profiles(profiles, cfg.scenario.group_size, &requested);
    std::vector<engine::Agent> population = engine::make_population(values);

    engine::PhaseConfig phases = cfg.phases;
    phases.master_seed = seed;
    engine::experience_phase(population, cfg.scenario, phases);
    engine::train_population(population, cfg.scenario, phases, cfg.threads);

    ExperimentResult result;
    result.master_seed = seed;
    std::vector<engine::ResponseCurve> all_curves;
    int agent = 0;
    for (const StrategyProfile& p : profiles) {
        std::vector<engine::ResponseCurve> profile_curves;
        profile_curves.reserve(static_cast<std::size_t>(p.count));
        for (int k = 0; k < p.count; ++k, ++agent) {
            auto curve = engine::response_curve(population[static_cast<std::size_t>(agent)],
                                                cfg.scenario);
            result.curves.push_back({p.name, population[static_cast<std::size_t>(agent)].id, curve});
            all_curves.push_back(curve);
            profile_curves.push_back(std::move(curve));
        }
        if (!profile_curves.empty()) {
            result.mean_curves.emplace_back(p.name, mean_curve_of(profile_curves));
            result.classifications.emplace_back(
                p.name, classify_strategy(result.mean_curves.back().second));
        }
    }
    result.mean_curves.emplace_back("all", mean_curve_of(all_curves));
    return result;
}

int oracle_decide(const PersonalValues& values, double hypothetical_avg_others,
                  const pgg::ScenarioConfig& scen, double lambda) {
    validate(values);
    pgg::validate(scen);
    const double x = hypothetical_avg_others;
    if (!(x >= 0.0 && x <= scen.endowment)) {
        throw std::invalid_argument("hypothetical average outside [0, endowment]");
    }

    const double max_pay = pgg::max_payoff(scen);
    const int n_others = scen.group_size - 1;
    int best_action = 0;
    double best_utility = -std::numeric_limits<double>::infinity();
    std::vector<double> payoffs(static_cast<std::size_t>(scen.group_size));
    for (int a = 0; a <= scen.endowment; ++a) {
        const double pool = a + n_others * x;
        const double share = scen.enhancement_factor * pool / scen.group_size;
        const double own = scen.endowment - a + share;
        const double other = scen.endowment - x + share;
        payoffs[0] = own;
        std::fill(payoffs.begin() + 1, payoffs.end(), other);
        UtilityInputs in;
        in.p_s = normalize_payoff(own, max_pay);
        in.p_o = normalize_payoff(other, max_pay);
        in.gini = gini(payoffs);
        const double total = utility(values, in, lambda).total;
        if (total > best_utility) {
            best_utility = total;
            best_action = a;
        }
    }
    return best_action;
}

engine::ResponseCurve oracle_curve(const PersonalValues& values, const pgg::ScenarioConfig& scen,
                                   double lambda) {
    engine::ResponseCurve curve;
    curve.reserve(static_cast<std::size_t>(scen.endowment) + 1);
    for (int x = 0; x <= scen.endowment; ++x) {
        curve.push_back(oracle_decide(values, x, scen, lambda));
    }
    return curve;
}

ExperimentResult compare_rl(const PersonalValues& values, int n_agents, std::uint64_t seed,
                            const ExperimentConfig& cfg, RlMode rl_mode) {
    if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");

    ExperimentResult result;
    result.master_seed = seed;

    StrategyProfile profile{"framework", values, n_agents};
    int requested = 0;
    const std::vector<PersonalValues> pop_values =
        expand_profiles(std::span(&profile, 1), cfg.scenario.group_size, &requested);
    std::vector<engine::Agent> population = engine::make_population(pop_values);

    engine::PhaseConfig phases = cfg.phases;
    phases.master_seed = derive_seed(seed, 1);
    engine::experience_phase(population, cfg.scenario, phases);
    engine::train_population(population, cfg.scenario, phases, cfg.threads);

    std::vector<engine::ResponseCurve> framework_curves;
    framework_curves.reserve(static_cast<std::size_t>(requested));
    for (int i = 0; i < requested; ++i) {
        framework_curves.push_back(
            engine::response_curve(population[static_cast<std::size_t>(i)], cfg.scenario));
        result.curves.push_back({"framework", i, framework_curves.back()});
    }

    std::vector<engine::ResponseCurve> rl_curves;
    rl_curves.reserve(static_cast<std::size_t>(n_agents));
    if (rl_mode == RlMode::analytic) {
        const engine::ResponseCurve exact = oracle_curve(values, cfg.scenario, cfg.phases.utility_lambda);
        for (int i = 0; i < n_agents; ++i) rl_curves.push_back(exact);
    } else {
        // Strict-RL stand-in: same pipeline, trained until the predictions
        // are essentially perfect.
        StrategyProfile rl_profile{"oracle", values, n_agents};
        int rl_requested = 0;
        const std::vector<PersonalValues> rl_values =
            expand_profiles(std::span(&rl_profile, 1), cfg.scenario.group_size, &rl_requested);
        std::vector<engine::Agent> rl_population = engine::make_population(rl_values);
        engine::PhaseConfig rl_phases = cfg.phases;
        rl_phases.master_seed = derive_seed(seed, 2);
        rl_phases.net_cfg.accuracy_threshold = 0.9999;
        engine::experience_phase(rl_population, cfg.scenario, rl_phases);
        engine::train_population(rl_population, cfg.scenario, rl_phases, cfg.threads);
        for (int i = 0; i < n_agents; ++i) {
            rl_curves.push_back(
                engine::response_curve(rl_population[static_cast<std::size_t>(i)], cfg.scenario));
        }
    }
    for (int i = 0; i < n_agents; ++i) {
        result.curves.push_back({"oracle", i, rl_curves[static_cast<std::size_t>(i)]});
    }

    result.mean_curves.emplace_back("framework", mean_curve_of(framework_curves));
    result.mean_curves.emplace_back("oracle", mean_curve_of(rl_curves));
    result.stats.emplace_back("framework_mean_contribution", mean_contribution(framework_curves));
    result.stats.emplace_back("oracle_mean_contribution", mean_contribution(rl_curves));
    result.stats.emplace_back("framework_max_pairwise_diff", max_pairwise_difference(framework_curves));
    result.stats.emplace_back("oracle_max_pairwise_diff", max_pairwise_difference(rl_curves));
    return result;
}

}  // namespace abm::experiments
