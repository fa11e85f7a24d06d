// pggsim — command-line runner for the value-driven public-goods simulator.
//
// Subcommands: sweep | replicate | compare-rl | respond | selftest.
// Every experiment writes CSV files plus a manifest.json into --out; reruns
// with the same configuration and seed produce byte-identical files.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abm/csv.hpp"
#include "abm/engine.hpp"
#include "abm/experiments.hpp"
#include "abm/pgg.hpp"
#include "abm/selftest.hpp"
#include "abm/values.hpp"

namespace {

constexpr const char* kVersion = "pggsim 1.0.0";

using abm::experiments::ExperimentConfig;
using abm::experiments::ExperimentResult;
using abm::experiments::StrategyProfile;
using ordered_json = nlohmann::ordered_json;

struct RunOptions {
    ExperimentConfig experiment;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::string regroup = "random";
};

/// Shared scenario/phase/run options, added to each experiment subcommand so
/// they can also be set from the matching config-file section.
void add_common_options(CLI::App* sub, RunOptions& opt) {
    auto& scen = opt.experiment.scenario;
    auto& phases = opt.experiment.phases;
    auto& net = phases.net_cfg;

    sub->add_option("--endowment", scen.endowment, "Monetary units per round")
        ->capture_default_str();
    sub->add_option("--factor", scen.enhancement_factor, "Public-good enhancement factor f")
        ->capture_default_str();
    sub->add_option("--group-size", scen.group_size, "Players per group")->capture_default_str();
    sub->add_option("--regroup", opt.regroup, "Group matching: random | fixed")
        ->check(CLI::IsMember({"random", "fixed"}))
        ->capture_default_str();

    sub->add_option("--rounds", phases.experience_rounds, "Experience-phase rounds")
        ->capture_default_str();
    sub->add_option("--lambda", phases.utility_lambda, "Cost weight in the utility function")
        ->capture_default_str();

    sub->add_option("--hidden", net.hidden_units, "Hidden units")->capture_default_str();
    sub->add_option("--lr", net.learning_rate_init, "Initial learning rate")
        ->capture_default_str();
    sub->add_option("--lr-decay", net.lr_decay_factor, "Learning-rate decay factor")
        ->capture_default_str();
    sub->add_option("--patience", net.patience_epochs, "Epochs without improvement before decay")
        ->capture_default_str();
    sub->add_option("--max-epochs", net.max_epochs, "Training epoch cap")->capture_default_str();
    sub->add_option("--batch", net.batch_size, "Mini-batch size")->capture_default_str();
    sub->add_option("--validation-fraction", net.validation_fraction, "Hold-out fraction")
        ->capture_default_str();
    sub->add_option("--threshold", net.accuracy_threshold,
                    "Validation R^2 at which training stops")
        ->capture_default_str();
    sub->add_option("--momentum", net.momentum, "SGD momentum")->capture_default_str();

    sub->add_option("--seed", opt.seed, "Master seed; all per-agent seeds derive from it")
        ->capture_default_str();
    sub->add_option("--threads", opt.experiment.threads, "Training parallelism (0 = all cores)")
        ->capture_default_str();
    sub->add_option("--out", opt.output_dir, "Output directory")
        ->envname("PGGSIM_OUT")
        ->capture_default_str();
}

void finalize_options(RunOptions& opt) {
    opt.experiment.scenario.regroup = opt.regroup == "fixed"
                                          ? abm::pgg::Regroup::fixed
                                          : abm::pgg::Regroup::random_each_round;
    abm::pgg::validate(opt.experiment.scenario);
    abm::engine::validate(opt.experiment.phases);
}

std::filesystem::path prepare_output_dir(const RunOptions& opt) {
    std::filesystem::path dir(opt.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ordered_json scenario_json(const RunOptions& opt) {
    const auto& scen = opt.experiment.scenario;
    return {{"endowment", scen.endowment},
            {"enhancement_factor", scen.enhancement_factor},
            {"group_size", scen.group_size},
            {"regroup", opt.regroup}};
}

ordered_json phases_json(const RunOptions& opt) {
    const auto& phases = opt.experiment.phases;
    const auto& net = phases.net_cfg;
    return {{"experience_rounds", phases.experience_rounds},
            {"utility_lambda", phases.utility_lambda},
            {"network",
             {{"hidden_units", net.hidden_units},
              {"learning_rate_init", net.learning_rate_init},
              {"lr_decay_factor", net.lr_decay_factor},
              {"patience_epochs", net.patience_epochs},
              {"max_epochs", net.max_epochs},
              {"batch_size", net.batch_size},
              {"validation_fraction", net.validation_fraction},
              {"accuracy_threshold", net.accuracy_threshold},
              {"momentum", net.momentum}}}};
}

void write_manifest(const std::filesystem::path& dir, const RunOptions& opt,
                    const std::string& command, ordered_json experiment_params,
                    const std::vector<std::string>& outputs) {
    ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["master_seed"] = opt.seed;
    manifest["seed_derivation"] = "per-agent seed = derive_seed(master_seed, agent_id)";
    manifest["scenario"] = scenario_json(opt);
    manifest["phases"] = phases_json(opt);
    manifest["experiment"] = std::move(experiment_params);
    manifest["outputs"] = outputs;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

/// Profile spec grammar:
///   free_rider:13
///   hump_shaped:6
///   conditional_cooperator:22
///   mixed=0.5,0.5,0.5,0.5:3      (custom values si,al,co,fa)
StrategyProfile parse_profile(const std::string& spec) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos || colon + 1 >= spec.size()) {
        throw std::invalid_argument("--profile: expected NAME:COUNT in '" + spec + "'");
    }
    int count = 0;
    try {
        count = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("--profile: bad count in '" + spec + "'");
    }

    const std::string head = spec.substr(0, colon);
    const auto eq = head.find('=');
    if (eq == std::string::npos) {
        if (head == "free_rider") return abm::experiments::free_rider_profile(count);
        if (head == "hump_shaped") return abm::experiments::hump_shaped_profile(count);
        if (head == "conditional_cooperator") {
            return abm::experiments::conditional_cooperator_profile(count);
        }
        throw std::invalid_argument("--profile: unknown built-in profile '" + head + "'");
    }

    abm::PersonalValues values;
    double* fields[4] = {&values.si, &values.al, &values.co, &values.fa};
    std::stringstream body(head.substr(eq + 1));
    std::string token;
    int parsed = 0;
    while (std::getline(body, token, ',')) {
        if (parsed >= 4) break;
        try {
            *fields[parsed++] = std::stod(token);
        } catch (const std::exception&) {
            throw std::invalid_argument("--profile: bad value '" + token + "' in '" + spec + "'");
        }
    }
    if (parsed != 4) {
        throw std::invalid_argument("--profile: expected si,al,co,fa in '" + spec + "'");
    }
    return {head.substr(0, eq), values, count};
}

int run_sweep(const RunOptions& opt, const std::vector<double>& al_values, int agents_per_value) {
    const auto dir = prepare_output_dir(opt);
    const ExperimentResult result =
        abm::experiments::sweep_altruism(al_values, opt.seed, opt.experiment, agents_per_value);

    std::ostringstream csv;
    abm::csv::write_sweep(result, csv);
    write_file(dir / "sweep.csv", csv.str());
    write_manifest(dir, opt, "sweep",
                   {{"al_values", al_values}, {"agents_per_value", agents_per_value}},
                   {"sweep.csv"});

    for (const auto& [group, label] : result.classifications) {
        std::cout << "al=" << group << " -> " << abm::experiments::to_string(label) << '\n';
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << '\n';
    return 0;
}

int run_replicate(const RunOptions& opt, const std::vector<std::string>& profile_specs,
                  bool dump_experiences) {
    std::vector<StrategyProfile> profiles;
    profiles.reserve(profile_specs.size());
    for (const auto& spec : profile_specs) profiles.push_back(parse_profile(spec));

    const auto dir = prepare_output_dir(opt);
    const ExperimentResult result =
        abm::experiments::replicate_experiment(profiles, opt.seed, opt.experiment);

    std::ostringstream csv;
    abm::csv::write_replicate(result, csv);
    write_file(dir / "replicate.csv", csv.str());

    std::vector<std::string> outputs{"replicate.csv"};
    if (dump_experiences) {
        // Re-run the experience phase alone to export the training data;
        // same seed, so the buffers match the trained run.
        int requested = 0;
        std::vector<abm::PersonalValues> values;
        for (const auto& p : profiles) {
            for (int k = 0; k < p.count; ++k) values.push_back(p.values);
        }
        requested = static_cast<int>(values.size());
        while (values.size() % static_cast<std::size_t>(opt.experiment.scenario.group_size) != 0) {
            values.push_back(values.back());
        }
        auto population = abm::engine::make_population(values);
        auto phases = opt.experiment.phases;
        phases.master_seed = opt.seed;
        abm::engine::experience_phase(population, opt.experiment.scenario, phases);
        std::ostringstream exp_csv;
        abm::csv::write_experiences(std::span(population.data(),
                                              static_cast<std::size_t>(requested)), exp_csv);
        write_file(dir / "experiences.csv", exp_csv.str());
        outputs.push_back("experiences.csv");
    }

    write_manifest(dir, opt, "replicate", {{"profiles", profile_specs}}, outputs);

    for (const auto& [name, label] : result.classifications) {
        std::cout << name << " -> " << abm::experiments::to_string(label) << '\n';
    }
    std::cout << "wrote " << (dir / "replicate.csv").string() << '\n';
    return 0;
}

int run_compare_rl(const RunOptions& opt, const abm::PersonalValues& values, int n_agents,
                   const std::string& rl_mode) {
    const auto dir = prepare_output_dir(opt);
    const auto mode = rl_mode == "trained" ? abm::experiments::RlMode::trained
                                           : abm::experiments::RlMode::analytic;
    const ExperimentResult result =
        abm::experiments::compare_rl(values, n_agents, opt.seed, opt.experiment, mode);

    std::ostringstream csv;
    abm::csv::write_compare_rl(result, csv);
    write_file(dir / "compare_rl.csv", csv.str());
    write_manifest(dir, opt, "compare-rl",
                   {{"values", {values.si, values.al, values.co, values.fa}},
                    {"agents", n_agents},
                    {"rl_mode", rl_mode}},
                   {"compare_rl.csv"});

    for (const auto& [name, value] : result.stats) {
        std::cout << name << " = " << value << '\n';
    }
    std::cout << "wrote " << (dir / "compare_rl.csv").string() << '\n';
    return 0;
}

int run_respond(const RunOptions& opt, const abm::PersonalValues& values, bool use_oracle,
                bool with_utility, const std::string& save_net, bool dump_experiences) {
    const auto dir = prepare_output_dir(opt);
    const auto& scen = opt.experiment.scenario;

    abm::engine::ResponseCurve curve;
    std::vector<std::vector<double>> predicted;
    std::vector<std::string> outputs{"respond.csv"};

    if (use_oracle) {
        curve = abm::experiments::oracle_curve(values, scen, opt.experiment.phases.utility_lambda);
    } else {
        // One agent of interest, padded to a full group of identical peers.
        std::vector<abm::PersonalValues> pop_values(
            static_cast<std::size_t>(scen.group_size), values);
        auto population = abm::engine::make_population(pop_values);
        auto phases = opt.experiment.phases;
        phases.master_seed = opt.seed;
        abm::engine::experience_phase(population, scen, phases);
        abm::engine::train_population(population, scen, phases, opt.experiment.threads);
        const auto& agent = population.front();
        curve = abm::engine::response_curve(agent, scen);

        if (with_utility) {
            const abm::nnet::AffineScaler in_scale{0.0, static_cast<double>(scen.endowment)};
            const abm::nnet::AffineScaler target_scale{
                -3.0 * opt.experiment.phases.utility_lambda, 1.0};
            for (int x = 0; x <= scen.endowment; ++x) {
                std::vector<double> row;
                row.reserve(static_cast<std::size_t>(scen.endowment) + 1);
                for (int a = 0; a <= scen.endowment; ++a) {
                    const std::array<double, 2> input{in_scale.to_unit(x), in_scale.to_unit(a)};
                    row.push_back(target_scale.from_unit(abm::nnet::forward(*agent.net, input)));
                }
                predicted.push_back(std::move(row));
            }
        }
        if (!save_net.empty()) {
            abm::nnet::save_network(*agent.net, (dir / save_net).string());
            outputs.push_back(save_net);
        }
        if (dump_experiences) {
            std::ostringstream exp_csv;
            abm::csv::write_experiences(std::span(population.data(), 1), exp_csv);
            write_file(dir / "experiences.csv", exp_csv.str());
            outputs.push_back("experiences.csv");
        }
    }

    std::ostringstream csv;
    abm::csv::write_respond(curve, predicted, csv);
    write_file(dir / "respond.csv", csv.str());
    write_manifest(dir, opt, "respond",
                   {{"values", {values.si, values.al, values.co, values.fa}},
                    {"oracle", use_oracle}},
                   outputs);
    std::cout << "wrote " << (dir / "respond.csv").string() << '\n';
    return 0;
}

int run_selftest(std::uint64_t seed) {
    const auto results = abm::selftest::run_selftest(seed);
    bool all_pass = true;
    for (const auto& check : results) {
        all_pass = all_pass && check.pass;
        std::printf("[%s] %-20s %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str());
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Value-driven agent-based public-goods-game simulator"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "INI/TOML config file; sections per subcommand");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    RunOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "Altruism sweep at fixed self interest 0.5");
    add_common_options(sweep, sweep_opt);
    std::vector<double> al_values{0.40, 0.45, 0.50, 0.55, 0.60};
    int agents_per_value = 10;
    sweep->add_option("--al", al_values, "Altruism grid")->capture_default_str();
    sweep->add_option("--agents-per-value", agents_per_value, "Agents trained per al value")
        ->capture_default_str();

    RunOptions replicate_opt;
    auto* replicate = app.add_subcommand("replicate", "Mixed-strategy population experiment");
    add_common_options(replicate, replicate_opt);
    std::vector<std::string> profile_specs{"conditional_cooperator:22", "free_rider:13",
                                           "hump_shaped:6", "other=0.5,0.5,0.5,0.5:3"};
    bool replicate_dump = false;
    replicate->add_option("--profile", profile_specs,
                          "Profile spec NAME:COUNT or NAME=si,al,co,fa:COUNT")
        ->capture_default_str();
    replicate->add_flag("--dump-experiences", replicate_dump, "Also export experiences.csv");

    RunOptions compare_opt;
    auto* compare = app.add_subcommand("compare-rl", "Learned agents vs exact-utility argmax");
    add_common_options(compare, compare_opt);
    abm::PersonalValues compare_values{.si = 0.0, .al = 0.0, .co = 0.8, .fa = 0.0};
    int compare_agents = 4;
    std::string rl_mode = "analytic";
    compare->add_option("--si", compare_values.si, "Self interest")->capture_default_str();
    compare->add_option("--al", compare_values.al, "Altruism")->capture_default_str();
    compare->add_option("--co", compare_values.co, "Conformity")->capture_default_str();
    compare->add_option("--fa", compare_values.fa, "Fairness")->capture_default_str();
    compare->add_option("--agents", compare_agents, "Agents per mode")->capture_default_str();
    compare->add_option("--rl-mode", rl_mode, "Reference mode: analytic | trained")
        ->check(CLI::IsMember({"analytic", "trained"}))
        ->capture_default_str();

    RunOptions respond_opt;
    auto* respond = app.add_subcommand("respond", "Response curve of a single agent");
    add_common_options(respond, respond_opt);
    abm::PersonalValues respond_values;
    bool respond_oracle = false;
    bool respond_with_utility = false;
    bool respond_dump = false;
    std::string save_net;
    respond->add_option("--si", respond_values.si, "Self interest")->capture_default_str();
    respond->add_option("--al", respond_values.al, "Altruism")->capture_default_str();
    respond->add_option("--co", respond_values.co, "Conformity")->capture_default_str();
    respond->add_option("--fa", respond_values.fa, "Fairness")->capture_default_str();
    respond->add_flag("--oracle", respond_oracle, "Exact-utility argmax instead of training");
    respond->add_flag("--with-utility", respond_with_utility,
                      "Add predicted-utility wide columns");
    respond->add_option("--save-net", save_net, "Dump the trained network to this file");
    respond->add_flag("--dump-experiences", respond_dump, "Also export experiences.csv");

    auto* selftest = app.add_subcommand("selftest", "Run the built-in property suite");
    std::uint64_t selftest_seed = 1;
    selftest->add_option("--seed", selftest_seed, "Seed for the randomized checks")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "run '" << (argc > 0 ? argv[0] : "pggsim") << " --help' for usage\n";
        return 2;
    }

    try {
        if (sweep->parsed()) {
            finalize_options(sweep_opt);
            return run_sweep(sweep_opt, al_values, agents_per_value);
        }
        if (replicate->parsed()) {
            finalize_options(replicate_opt);
            return run_replicate(replicate_opt, profile_specs, replicate_dump);
        }
        if (compare->parsed()) {
            finalize_options(compare_opt);
            return run_compare_rl(compare_opt, compare_values, compare_agents, rl_mode);
        }
        if (respond->parsed()) {
            finalize_options(respond_opt);
            return run_respond(respond_opt, respond_values, respond_oracle, respond_with_utility,
                               save_net, respond_dump);
        }
        if (selftest->parsed()) {
            return run_selftest(selftest_seed);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
