#include "abm/pgg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace abm::pgg {

namespace {

void check_on_grid(int contribution, const ScenarioConfig& cfg) {
    if (contribution < 0 || contribution > cfg.endowment) {
        throw std::invalid_argument("contribution " + std::to_string(contribution) +
                                    " outside grid [0, " + std::to_string(cfg.endowment) + "]");
    }
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    if (cfg.endowment < 1) throw std::invalid_argument("endowment must be >= 1");
    if (cfg.group_size < 2) throw std::invalid_argument("group_size must be >= 2");
    // 1 < f < N keeps the social dilemma: contributing is socially optimal
    // but individually dominated.
    if (!(cfg.enhancement_factor > 1.0 && cfg.enhancement_factor < cfg.group_size)) {
        throw std::invalid_argument("enhancement_factor must satisfy 1 < f < group_size");
    }
}

double payoff(int own_contribution, std::span<const int> all_contributions,
              const ScenarioConfig& cfg) {
    if (all_contributions.size() != static_cast<std::size_t>(cfg.group_size)) {
        throw std::invalid_argument("expected one contribution per group member");
    }
    check_on_grid(own_contribution, cfg);
    long long sum = 0;
    bool own_seen = false;
    for (int c : all_contributions) {
        check_on_grid(c, cfg);
        own_seen = own_seen || c == own_contribution;
        sum += c;
    }
    if (!own_seen) {
        throw std::invalid_argument("own contribution does not appear in the group vector");
    }
    return cfg.endowment - own_contribution +
           cfg.enhancement_factor * static_cast<double>(sum) / cfg.group_size;
}

double payoff_from_others_average(int own_contribution, double avg_others,
                                  const ScenarioConfig& cfg) {
    check_on_grid(own_contribution, cfg);
    if (!(avg_others >= 0.0 && avg_others <= cfg.endowment)) {
        throw std::invalid_argument("average of others outside [0, endowment]");
    }
    const double pool = own_contribution + (cfg.group_size - 1) * avg_others;
    return cfg.endowment - own_contribution +
           cfg.enhancement_factor * pool / cfg.group_size;
}

double max_payoff(const ScenarioConfig& cfg) {
    // Pure formula, deliberately not validating the dilemma condition so the
    // analytic bound can be inspected at boundary parameters.
    return cfg.endowment + cfg.enhancement_factor * (cfg.group_size - 1) *
                               static_cast<double>(cfg.endowment) / cfg.group_size;
}

RoundOutcome play_round(std::span<const int> contributions,
                        std::span<const PersonalValues> member_values,
                        const ScenarioConfig& cfg, double lambda,
                        std::span<const int> member_ids) {
    validate(cfg);
    const auto n = static_cast<std::size_t>(cfg.group_size);
    if (contributions.size() != n) {
        throw std::invalid_argument("expected one contribution per group member");
    }
    if (member_values.size() != n) {
        throw std::invalid_argument("expected personal values for every group member");
    }
    if (!member_ids.empty() && member_ids.size() != n) {
        throw std::invalid_argument("member_ids length does not match group size");
    }

    RoundOutcome out;
    out.members.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.members[i] = member_ids.empty() ? static_cast<int>(i) : member_ids[i];
    }
    out.contributions.assign(contributions.begin(), contributions.end());

    long long sum = 0;
    for (int c : contributions) {
        check_on_grid(c, cfg);
        sum += c;
    }

    const double max_pay = max_payoff(cfg);
    out.payoffs.resize(n);
    out.observations.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.payoffs[i] = payoff(contributions[i], contributions, cfg);
        out.observations[i] = static_cast<double>(sum - contributions[i]) / (cfg.group_size - 1);
    }

    const double payoff_total = std::accumulate(out.payoffs.begin(), out.payoffs.end(), 0.0);
    out.utility_inputs.resize(n);
    out.utilities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        UtilityInputs in;
        in.p_s = normalize_payoff(out.payoffs[i], max_pay);
        in.p_o = normalize_payoff((payoff_total - out.payoffs[i]) / (cfg.group_size - 1), max_pay);
        in.gini = gini(out.payoffs);
        out.utility_inputs[i] = in;
        out.utilities[i] = utility(member_values[i], in, lambda).total;
    }
    return out;
}

}  // namespace abm::pgg
