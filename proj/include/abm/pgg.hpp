#pragma once

#include <span>
#include <vector>

#include "abm/values.hpp"

namespace abm::pgg {

enum class Regroup { fixed, random_each_round };

/// Game parameters of one public-goods scenario. The action set is the
/// integer contribution grid {0, ..., endowment}.
struct ScenarioConfig {
    int endowment = 20;
    double enhancement_factor = 1.4;
    int group_size = 4;
    Regroup regroup = Regroup::random_each_round;
};

void validate(const ScenarioConfig& cfg);

inline int n_actions(const ScenarioConfig& cfg) { return cfg.endowment + 1; }

/// Payoff of one group member, sum form:
/// endowment - own + f * (sum of all contributions) / N.
/// `all_contributions` covers the full group, own slot included.
double payoff(int own_contribution, std::span<const int> all_contributions,
              const ScenarioConfig& cfg);

/// Same payoff computed from the average contribution of the other members.
/// Agrees with the sum form to float precision; kept as the second route.
double payoff_from_others_average(int own_contribution, double avg_others,
                                  const ScenarioConfig& cfg);

/// Largest attainable payoff: contribute nothing while everyone else
/// contributes the full endowment.
double max_payoff(const ScenarioConfig& cfg);

/// Everything one group round produces, per member: raw payoffs, the
/// observation each member is told (average contribution of the others),
/// the normalized utility inputs, and the resulting utility totals.
struct RoundOutcome {
    std::vector<int> members;
    std::vector<int> contributions;
    std::vector<double> payoffs;
    std::vector<double> observations;
    std::vector<UtilityInputs> utility_inputs;
    std::vector<double> utilities;
};

RoundOutcome play_round(std::span<const int> contributions,
                        std::span<const PersonalValues> member_values,
                        const ScenarioConfig& cfg,
                        double lambda = kDefaultLambda,
                        std::span<const int> member_ids = {});

}  // namespace abm::pgg
