#pragma once

#include <span>

namespace abm {

/// The four personal values that parameterize an agent's utility function,
/// each in [0,1]: self interest, altruism, conformity, fairness.
struct PersonalValues {
    double si = 0.0;
    double al = 0.0;
    double co = 0.0;
    double fa = 0.0;
};

/// Normalized observables the utility function is evaluated on.
/// p_s: own payoff relative to the maximal possible payoff.
/// p_o: average payoff of the other group members, relative.
/// gini: Gini coefficient of the group's payoffs.
struct UtilityInputs {
    double p_s = 0.0;
    double p_o = 0.0;
    double gini = 0.0;
};

/// Full decomposition of one utility evaluation.
/// total = -lambda * (cost_si + cost_al + cost_co) + reward.
struct UtilityBreakdown {
    double cost_si = 0.0;
    double cost_al = 0.0;
    double cost_co = 0.0;
    double prop = 0.0;
    double reward = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

constexpr double kDefaultLambda = 10.0;

void validate(const PersonalValues& v);
void validate(const UtilityInputs& in);

/// min(p_s,p_o)/max(p_s,p_o); 1 for p_s == p_o, including the 0/0 case.
double proportion(double p_s, double p_o);

/// Gini coefficient of a non-negative vector: sum_ij |x_i-x_j| / (2 n^2 mu).
/// A zero-mean vector is treated as perfectly equal (0).
double gini(std::span<const double> payoffs);

UtilityBreakdown utility(const PersonalValues& v, const UtilityInputs& in,
                         double lambda = kDefaultLambda);

/// raw / max_payoff, rejecting raw outside [0, max_payoff]. A payoff beyond
/// the analytic maximum indicates a bug in the payoff model, not bad data.
double normalize_payoff(double raw, double max_payoff);

}  // namespace abm
