#pragma once

#include <ostream>
#include <span>
#include <string>

#include "abm/engine.hpp"
#include "abm/experiments.hpp"

namespace abm::csv {

/// Locale-independent decimal formatting (shortest round-trip for the
/// default, fixed decimals where a column pins its precision).
std::string format_double(double v);
std::string format_double_fixed(double v, int decimals);

// One writer per experiment schema. Header always present, LF line ends.
void write_sweep(const experiments::ExperimentResult& result, std::ostream& out);
void write_replicate(const experiments::ExperimentResult& result, std::ostream& out);
void write_compare_rl(const experiments::ExperimentResult& result, std::ostream& out);
void write_respond(const engine::ResponseCurve& curve,
                   std::span<const std::vector<double>> predicted_utilities, std::ostream& out);
void write_experiences(std::span<const engine::Agent> population, std::ostream& out);

}  // namespace abm::csv
