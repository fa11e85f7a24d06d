#include "abm/csv.hpp"

#include <charconv>
#include <map>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace abm::csv {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return {buf, res.ptr};
}

std::string format_double_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return {buf, res.ptr};
}

void write_sweep(const experiments::ExperimentResult& result, std::ostream& out) {
    out << "al,x,mean_action,std_action,n_agents\n";
    for (const auto& [group, mean] : result.mean_curves) {
        std::vector<engine::ResponseCurve> curves;
        for (const auto& record : result.curves) {
            if (record.group == group) curves.push_back(record.curve);
        }
        if (curves.empty()) continue;
        const std::vector<double> sd = experiments::std_curve_of(curves);
        for (std::size_t x = 0; x < mean.size(); ++x) {
            out << group << ',' << x << ',' << format_double_fixed(mean[x], 6) << ','
                << format_double_fixed(sd[x], 6) << ',' << curves.size() << '\n';
        }
    }
}

void write_replicate(const experiments::ExperimentResult& result, std::ostream& out) {
    out << "profile,agent_id,x,action\n";
    for (const auto& record : result.curves) {
        for (std::size_t x = 0; x < record.curve.size(); ++x) {
            out << record.group << ',' << record.agent_id << ',' << x << ','
                << record.curve[x] << '\n';
        }
    }
}

void write_compare_rl(const experiments::ExperimentResult& result, std::ostream& out) {
    out << "mode,agent_id,x,action\n";
    for (const auto& record : result.curves) {
        for (std::size_t x = 0; x < record.curve.size(); ++x) {
            out << record.group << ',' << record.agent_id << ',' << x << ','
                << record.curve[x] << '\n';
        }
    }
}

void write_respond(const engine::ResponseCurve& curve,
                   std::span<const std::vector<double>> predicted_utilities, std::ostream& out) {
    const bool wide = !predicted_utilities.empty();
    if (wide && predicted_utilities.size() != curve.size()) {
        throw std::invalid_argument("predicted utilities do not match the curve length");
    }
    out << "x,action";
    if (wide) {
        for (std::size_t a = 0; a < predicted_utilities.front().size(); ++a) out << ",u" << a;
    }
    out << '\n';
    for (std::size_t x = 0; x < curve.size(); ++x) {
        out << x << ',' << curve[x];
        if (wide) {
            for (double u : predicted_utilities[x]) out << ',' << format_double(u);
        }
        out << '\n';
    }
}

void write_experiences(std::span<const engine::Agent> population, std::ostream& out) {
    out << "agent_id,round,observation,action,utility\n";
    for (const auto& agent : population) {
        for (std::size_t round = 0; round < agent.experiences.size(); ++round) {
            const auto& e = agent.experiences[round];
            out << agent.id << ',' << round << ',' << format_double(e.observation) << ','
                << e.action << ',' << format_double(e.utility) << '\n';
        }
    }
}

}  // namespace abm::csv
