#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abm/engine.hpp"
#include "abm/pgg.hpp"
#include "abm/values.hpp"

namespace abm::experiments {

enum class StrategyLabel { free_rider, conditional_cooperator, hump_shaped, other };

std::string to_string(StrategyLabel label);

/// A block of agents sharing one set of personal values.
struct StrategyProfile {
    std::string name;
    PersonalValues values;
    int count = 0;
};

/// The three canonical strategies: free riders want the maximal payoff
/// (si=1), hump-shaped agents want half of it for themselves and for
/// others (si=al=0.5), conditional cooperators tolerate at most a 20%
/// payoff gap (co=0.8).
StrategyProfile free_rider_profile(int count);
StrategyProfile hump_shaped_profile(int count);
StrategyProfile conditional_cooperator_profile(int count);

/// Operational thresholds turning a response curve into a strategy label.
struct ClassifierConfig {
    double free_rider_mean_max = 1.0;
    double spearman_min = 0.8;
    int peak_window_lo = 4;
    int peak_window_hi = 16;
    double tail_decay_factor = 0.6;
};

/// Rules, applied in order: free rider if the curve mean is at most
/// free_rider_mean_max; conditional cooperator if Spearman rho(x, curve)
/// reaches spearman_min and curve(20) >= curve(10); hump-shaped if the
/// maximum lies inside the peak window and curve(20) <= decay * max;
/// otherwise other. Requires the 21-point grid.
StrategyLabel classify_strategy(std::span<const double> curve, const ClassifierConfig& cfg = {});
StrategyLabel classify_strategy(const engine::ResponseCurve& curve, const ClassifierConfig& cfg = {});

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side has zero rank variance.
double spearman(std::span<const double> x, std::span<const double> y);

struct CurveRecord {
    std::string group;
    int agent_id = 0;
    engine::ResponseCurve curve;
};

struct ExperimentResult {
    std::vector<CurveRecord> curves;
    std::vector<std::pair<std::string, std::vector<double>>> mean_curves;
    std::vector<std::pair<std::string, StrategyLabel>> classifications;
    std::vector<std::pair<std::string, double>> stats;
    std::uint64_t master_seed = 0;

    const std::vector<double>& mean_curve(const std::string& group) const;
};

struct ExperimentConfig {
    pgg::ScenarioConfig scenario;
    engine::PhaseConfig phases;
    int threads = 0;
};

std::vector<double> mean_curve_of(std::span<const engine::ResponseCurve> curves);
std::vector<double> std_curve_of(std::span<const engine::ResponseCurve> curves);

/// Altruism sweep: for each al, trains `agents_per_value` agents with
/// values (si=0.5, al, 0, 0) in their own population and reports the mean
/// response curve, grouped by the al value.
ExperimentResult sweep_altruism(std::span<const double> al_values, std::uint64_t seed,
                                const ExperimentConfig& cfg, int agents_per_value = 10);

/// Mixed-population replication: all profiles play and learn together;
/// emits per-profile curves, per-profile means, a population-wide mean,
/// and a strategy label per profile.
ExperimentResult replicate_experiment(std::span<const StrategyProfile> profiles,
                                      std::uint64_t seed, const ExperimentConfig& cfg);

/// Exact-utility argmax under the homogeneity assumption: every co-player
/// contributes exactly the hypothetical average. This is the
/// full-information limit the learned agents are compared against.
int oracle_decide(const PersonalValues& values, double hypothetical_avg_others,
                  const pgg::ScenarioConfig& scen, double lambda = kDefaultLambda);

engine::ResponseCurve oracle_curve(const PersonalValues& values, const pgg::ScenarioConfig& scen,
                                   double lambda = kDefaultLambda);

enum class RlMode {
    analytic,  // exact argmax (the well-defined limit)
    trained,   // same pipeline trained to accuracy_threshold 0.9999
};

/// Framework-vs-strict-RL comparison: n_agents learned response curves
/// (distinct seeds) against n_agents oracle curves, plus divergence stats.
ExperimentResult compare_rl(const PersonalValues& values, int n_agents, std::uint64_t seed,
                            const ExperimentConfig& cfg, RlMode rl_mode = RlMode::analytic);

}  // namespace abm::experiments
