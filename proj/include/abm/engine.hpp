#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "abm/nnet.hpp"
#include "abm/pgg.hpp"
#include "abm/values.hpp"

namespace abm::engine {

enum class Policy { random, learned, oracle };

/// One recorded experience: what the agent observed (average contribution
/// of its co-players), what it did, and the scalar utility that resulted.
/// The agent never sees the utility formula or its hidden inputs.
struct Experience {
    double observation = 0.0;
    int action = 0;
    double utility = 0.0;
};

struct Agent {
    int id = 0;
    PersonalValues values;
    std::vector<Experience> experiences;
    std::optional<nnet::Network> net;
    std::optional<nnet::TrainReport> train_report;
    Policy policy = Policy::random;
    bool experiences_sealed = false;
    // Only set on Policy::oracle agents: maps a hypothetical average
    // contribution of others to an action.
    std::function<int(double)> oracle_policy;
};

struct PhaseConfig {
    int experience_rounds = 2000;
    int iterations = 1;  // re-experience loop hook; only 1 is supported
    double utility_lambda = kDefaultLambda;
    nnet::NetworkConfig net_cfg;
    std::uint64_t master_seed = 0;
};

void validate(const PhaseConfig& cfg);

/// An agent's chosen contribution for every hypothetical average
/// contribution x in {0, ..., endowment}.
using ResponseCurve = std::vector<int>;

std::vector<Agent> make_population(std::span<const PersonalValues> values, int first_id = 0);

/// Phase 2: every agent plays `experience_rounds` rounds with uniformly
/// random actions and records (observation, action, utility) triples.
/// Groups are re-drawn per round or fixed, per the scenario's regroup tag.
void experience_phase(std::vector<Agent>& population, const pgg::ScenarioConfig& scen,
                      const PhaseConfig& cfg);

/// Phase 3 for one agent: fit the agent's own network to its own buffer.
/// Inputs (observation, action) and the utility target are affinely scaled
/// to [-1,1] using the scenario bounds, never the data. Seals the buffer
/// and switches the agent to Policy::learned.
nnet::TrainReport training_phase(Agent& agent, const pgg::ScenarioConfig& scen,
                                 const PhaseConfig& cfg);

/// Trains every agent in the population; agents are independent, so the
/// work is spread over `threads` (0 = hardware concurrency). The outcome
/// does not depend on the thread count.
void train_population(std::vector<Agent>& population, const pgg::ScenarioConfig& scen,
                      const PhaseConfig& cfg, int threads = 0);

/// Phase 4: evaluate the trained net at (x, a) for every action a and
/// return the argmax of predicted utility, ties broken toward the lower
/// action. Oracle agents delegate to their oracle_policy.
int decide(const Agent& agent, double hypothetical_avg_others, const pgg::ScenarioConfig& scen);

/// decide() for x = 0..endowment; pure query, the agent is not modified.
ResponseCurve response_curve(const Agent& agent, const pgg::ScenarioConfig& scen);

}  // namespace abm::engine
