#include "abm/engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace abm::engine {

namespace {

// Stream id for the experience phase, distinct from agent-id streams.
constexpr std::uint64_t kExperienceStream = 0xE9A9E5CEULL;

nnet::AffineScaler contribution_scaler(const pgg::ScenarioConfig& scen) {
    return {0.0, static_cast<double>(scen.endowment)};
}

nnet::AffineScaler utility_scaler(double lambda) {
    // Exact bounds of the utility function, not data-dependent.
    return {-3.0 * lambda, 1.0};
}

}  // namespace

void validate(const PhaseConfig& cfg) {
    if (cfg.experience_rounds < 1) throw std::invalid_argument("experience_rounds must be >= 1");
    if (cfg.iterations != 1) {
        throw std::invalid_argument("iterative re-experience is not supported; iterations must be 1");
    }
    if (!(cfg.utility_lambda > 0.0)) throw std::invalid_argument("utility_lambda must be positive");
    nnet::validate(cfg.net_cfg);
}

std::vector<Agent> make_population(std::span<const PersonalValues> values, int first_id) {
    std::vector<Agent> population;
    population.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        validate(values[i]);
        Agent a;
        a.id = first_id + static_cast<int>(i);
        a.values = values[i];
        population.push_back(std::move(a));
    }
    return population;
}

void experience_phase(std::vector<Agent>& population, const pgg::ScenarioConfig& scen,
                      const PhaseConfig& cfg) {
    pgg::validate(scen);
    validate(cfg);
    const auto n = static_cast<int>(population.size());
    if (n == 0 || n % scen.group_size != 0) {
        throw std::invalid_argument("population size " + std::to_string(n) +
                                    " is not divisible by group size " +
                                    std::to_string(scen.group_size));
    }
    for (const Agent& a : population) {
        if (a.policy != Policy::random || a.experiences_sealed) {
            throw std::logic_error("experience phase requires untrained agents with open buffers");
        }
    }

    Rng rng(derive_seed(cfg.master_seed, kExperienceStream));
    std::vector<int> order(population.size());
    std::iota(order.begin(), order.end(), 0);

    const auto group_size = static_cast<std::size_t>(scen.group_size);
    std::vector<int> group_ids(group_size);
    std::vector<int> contributions(group_size);
    std::vector<PersonalValues> group_values(group_size);

    for (Agent& a : population) {
        a.experiences.reserve(a.experiences.size() + static_cast<std::size_t>(cfg.experience_rounds));
    }

    for (int round = 0; round < cfg.experience_rounds; ++round) {
        if (scen.regroup == pgg::Regroup::random_each_round) rng.shuffle(order);
        for (std::size_t g = 0; g < order.size(); g += group_size) {
            for (std::size_t k = 0; k < group_size; ++k) {
                const Agent& member = population[static_cast<std::size_t>(order[g + k])];
                group_ids[k] = member.id;
                group_values[k] = member.values;
                contributions[k] = rng.uniform_int(0, scen.endowment);
            }
            const pgg::RoundOutcome outcome =
                pgg::play_round(contributions, group_values, scen, cfg.utility_lambda, group_ids);
            for (std::size_t k = 0; k < group_size; ++k) {
                Agent& member = population[static_cast<std::size_t>(order[g + k])];
                member.experiences.push_back(
                    {outcome.observations[k], contributions[k], outcome.utilities[k]});
            }
        }
    }
}

nnet::TrainReport training_phase(Agent& agent, const pgg::ScenarioConfig& scen,
                                 const PhaseConfig& cfg) {
    pgg::validate(scen);
    validate(cfg);
    if (agent.experiences.empty()) {
        throw std::logic_error("agent " + std::to_string(agent.id) +
                               ": cannot train on an empty experience buffer");
    }

    const nnet::AffineScaler in_scale = contribution_scaler(scen);
    const nnet::AffineScaler target_scale = utility_scaler(cfg.utility_lambda);

    std::vector<nnet::Sample> samples;
    samples.reserve(agent.experiences.size());
    for (const Experience& e : agent.experiences) {
        samples.push_back({{in_scale.to_unit(e.observation), in_scale.to_unit(e.action)},
                           target_scale.to_unit(e.utility)});
    }

    nnet::NetworkConfig net_cfg = cfg.net_cfg;
    net_cfg.input_dim = 2;
    net_cfg.rng_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(agent.id));

    nnet::Network net = nnet::init_network(net_cfg);
    nnet::TrainReport report;
    try {
        report = nnet::train(net, samples, net_cfg);
    } catch (const nnet::TrainingError& e) {
        throw nnet::TrainingError("agent " + std::to_string(agent.id) + ": " + e.what());
    }

    agent.net = std::move(net);
    agent.train_report = report;
    agent.policy = Policy::learned;
    agent.experiences_sealed = true;
    return report;
}

void train_population(std::vector<Agent>& population, const pgg::ScenarioConfig& scen,
                      const PhaseConfig& cfg, int threads) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    threads = std::min<int>(threads, static_cast<int>(population.size()));
    if (threads <= 1) {
        for (Agent& a : population) training_phase(a, scen, cfg);
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < population.size(); i = next.fetch_add(1)) {
            training_phase(population[i], scen, cfg);
        }
    };
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();  // rethrows the first worker failure
}

int decide(const Agent& agent, double hypothetical_avg_others, const pgg::ScenarioConfig& scen) {
    if (!(hypothetical_avg_others >= 0.0 && hypothetical_avg_others <= scen.endowment)) {
        throw std::invalid_argument("hypothetical average outside [0, endowment]");
    }
    if (agent.policy == Policy::oracle) {
        if (!agent.oracle_policy) throw std::logic_error("oracle agent without oracle policy");
        return agent.oracle_policy(hypothetical_avg_others);
    }
    if (agent.policy != Policy::learned || !agent.net) {
        throw std::logic_error("agent " + std::to_string(agent.id) +
                               " has no trained network; run the training phase first");
    }

    const nnet::AffineScaler in_scale = contribution_scaler(scen);
    const double obs = in_scale.to_unit(hypothetical_avg_others);
    int best_action = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    std::array<double, 2> input{obs, 0.0};
    for (int a = 0; a <= scen.endowment; ++a) {
        input[1] = in_scale.to_unit(a);
        const double value = nnet::forward(*agent.net, input);
        if (value > best_value) {  // strict: ties stay on the lower action
            best_value = value;
            best_action = a;
        }
    }
    return best_action;
}

ResponseCurve response_curve(const Agent& agent, const pgg::ScenarioConfig& scen) {
    ResponseCurve curve;
    curve.reserve(static_cast<std::size_t>(scen.endowment) + 1);
    for (int x = 0; x <= scen.endowment; ++x) {
        curve.push_back(decide(agent, x, scen));
    }
    return curve;
}

}  // namespace abm::engine
