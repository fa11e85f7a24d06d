#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "abm/nnet.hpp"
#include "abm/rng.hpp"

using namespace abm;
using nnet::Network;
using nnet::NetworkConfig;
using nnet::Sample;
using nnet::StopReason;

namespace {

/// 2-input / 2-hidden net with fixed parameters for hand evaluation.
Network small_fixture() {
    Network net = nnet::make_network(2, 2);
    // row-major input x hidden
    net.weights_hidden = {0.3, -0.5, 0.8, 0.25};
    net.bias_hidden = {0.1, -0.05};
    net.weights_out = {1.5, -2.0};
    net.bias_out = 0.07;
    return net;
}

std::vector<Sample> linear_samples(int n, std::uint64_t seed, double noise = 0.0) {
    Rng rng(seed);
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform01();
        double y = 0.8 * x + 0.1;
        if (noise > 0.0) y += rng.uniform_real(-noise, noise);
        samples.push_back({{x}, y});
    }
    return samples;
}

bool networks_identical(const Network& a, const Network& b) {
    return a.weights_hidden == b.weights_hidden && a.bias_hidden == b.bias_hidden &&
           a.weights_out == b.weights_out && a.bias_out == b.bias_out;
}

}  // namespace

TEST_CASE("forward: zero network maps everything to zero") {
    const Network net = nnet::make_network(3, 5);
    CHECK(nnet::forward(net, std::vector<double>{1.0, -2.0, 0.5}) == 0.0);
}

TEST_CASE("forward: single rectifier unit") {
    Network net = nnet::make_network(1, 1);
    net.weights_hidden = {1.0};
    net.weights_out = {1.0};
    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        CHECK(nnet::forward(net, std::vector<double>{x}) == doctest::Approx(std::max(0.0, x)));
    }
}

TEST_CASE("forward: hand-evaluated two-layer composition") {
    // z0 = 0.3*0.5 + 0.8*0.25 + 0.1  = 0.45 (active)
    // z1 = -0.5*0.5 + 0.25*0.25 - 0.05 = -0.2375 (clamped)
    // out = 1.5*0.45 + 0.07 = 0.745
    const Network net = small_fixture();
    CHECK(nnet::forward(net, std::vector<double>{0.5, 0.25}) ==
          doctest::Approx(0.745).epsilon(1e-12));
}

TEST_CASE("forward rejects bad input") {
    const Network net = nnet::make_network(2, 2);
    CHECK_THROWS_AS(nnet::forward(net, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(nnet::forward(net, std::vector<double>{1.0, std::nan("")}),
                    std::invalid_argument);
}

TEST_CASE("gradient: zero network and zero target has zero gradient") {
    const Network net = nnet::make_network(2, 3);
    const Network grad = nnet::gradient(net, std::vector<double>{0.4, -0.2}, 0.0);
    for (double g : grad.weights_hidden) CHECK(g == 0.0);
    for (double g : grad.bias_hidden) CHECK(g == 0.0);
    for (double g : grad.weights_out) CHECK(g == 0.0);
    CHECK(grad.bias_out == 0.0);
}

TEST_CASE("gradient: hand-computed chain rule on one unit") {
    Network net = nnet::make_network(1, 1);
    net.weights_hidden = {1.0};
    net.weights_out = {1.0};
    // pred = 0.5, target = 0.2, dloss = 2*(0.5-0.2) = 0.6
    const Network grad = nnet::gradient(net, std::vector<double>{0.5}, 0.2);
    CHECK(grad.bias_out == doctest::Approx(0.6));
    CHECK(grad.weights_out[0] == doctest::Approx(0.3));   // dloss * h
    CHECK(grad.bias_hidden[0] == doctest::Approx(0.6));   // dloss * w_out
    CHECK(grad.weights_hidden[0] == doctest::Approx(0.3));  // dloss * w_out * x
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(2024);
    constexpr double h = 1e-5;
    for (int k = 0; k < 25; ++k) {
        NetworkConfig cfg;
        cfg.input_dim = rng.uniform_int(1, 4);
        cfg.hidden_units = rng.uniform_int(1, 6);
        cfg.rng_seed = rng.next_u64();
        Network net = nnet::init_network(cfg);
        std::vector<double> input(static_cast<std::size_t>(cfg.input_dim));
        for (double& v : input) v = rng.uniform_real(-1.0, 1.0);
        const double target = rng.uniform_real(-1.0, 1.0);

        const Network analytic = nnet::gradient(net, input, target);
        auto loss = [&]() {
            const double r = nnet::forward(net, input) - target;
            return r * r;
        };
        auto check = [&](double& param, double grad) {
            const double saved = param;
            param = saved + h;
            const double up = loss();
            param = saved - h;
            const double down = loss();
            param = saved;
            const double fd = (up - down) / (2.0 * h);
            const double rel =
                std::abs(grad - fd) / std::max({std::abs(grad), std::abs(fd), 1e-6});
            CHECK(rel < 1e-4);
        };
        for (std::size_t i = 0; i < net.weights_hidden.size(); ++i) {
            check(net.weights_hidden[i], analytic.weights_hidden[i]);
        }
        for (std::size_t i = 0; i < net.bias_hidden.size(); ++i) {
            check(net.bias_hidden[i], analytic.bias_hidden[i]);
        }
        for (std::size_t i = 0; i < net.weights_out.size(); ++i) {
            check(net.weights_out[i], analytic.weights_out[i]);
        }
        check(net.bias_out, analytic.bias_out);
    }
}

TEST_CASE("r2_score basics and the zero-variance rule") {
    const std::vector<double> targets{1.0, 2.0, 3.0};
    CHECK(nnet::r2_score(targets, targets) == doctest::Approx(1.0));
    const std::vector<double> mean_pred{2.0, 2.0, 2.0};
    CHECK(nnet::r2_score(targets, mean_pred) == doctest::Approx(0.0));

    const std::vector<double> constant{0.7, 0.7, 0.7};
    const std::vector<double> close{0.70001, 0.69999, 0.7};
    const std::vector<double> far{0.5, 0.9, 0.7};
    CHECK(nnet::r2_score(constant, close) == 1.0);  // mse < 1e-8
    CHECK(nnet::r2_score(constant, far) == 0.0);
}

TEST_CASE("train: constant targets converge to the constant") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.hidden_units = 20;
    cfg.patience_epochs = 8;  // keep the rate up while the R^2 is pinned at 0
    cfg.rng_seed = 5;
    Rng rng(17);
    std::vector<Sample> samples;
    for (int i = 0; i < 400; ++i) samples.push_back({{rng.uniform01()}, 0.7});

    Network net = nnet::init_network(cfg);
    const auto report = nnet::train(net, samples, cfg);
    for (double x : {0.1, 0.5, 0.9}) {
        CHECK(nnet::forward(net, std::vector<double>{x}) == doctest::Approx(0.7).epsilon(0.015));
    }
    // zero-variance validation: the score is 1.0 (mse < 1e-8) or 0.0, never in between
    CHECK((report.final_validation_score == 1.0 || report.final_validation_score == 0.0));
}

TEST_CASE("train: noiseless linear function reaches the 0.99 threshold") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.rng_seed = 11;
    const auto samples = linear_samples(200, 33);
    Network net = nnet::init_network(cfg);
    const auto report = nnet::train(net, samples, cfg);
    CHECK(report.final_validation_score >= 0.99);
    CHECK(report.stopped_by == StopReason::threshold_reached);
    CHECK(report.epochs_run <= cfg.max_epochs);
}

TEST_CASE("train: unreachable threshold exhausts max_epochs") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.accuracy_threshold = 1.0;  // unreachable on noisy targets
    cfg.max_epochs = 5;
    cfg.rng_seed = 3;
    const auto samples = linear_samples(100, 44, 0.2);
    Network net = nnet::init_network(cfg);
    const auto report = nnet::train(net, samples, cfg);
    CHECK(report.stopped_by == StopReason::max_epochs);
    CHECK(report.epochs_run == 5);
}

TEST_CASE("train: hopeless data decays the learning rate to the floor") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.patience_epochs = 1;
    cfg.lr_decay_factor = 0.01;
    cfg.rng_seed = 9;
    Rng rng(55);
    std::vector<Sample> samples;  // pure noise, nothing to learn
    for (int i = 0; i < 100; ++i) {
        samples.push_back({{rng.uniform01()}, rng.uniform_real(-1.0, 1.0)});
    }
    Network net = nnet::init_network(cfg);
    const auto report = nnet::train(net, samples, cfg);
    CHECK(report.stopped_by == StopReason::lr_floor);
    CHECK(report.final_learning_rate < nnet::kLearningRateFloor);
}

TEST_CASE("train: early stop is honored and the schedule is monotone") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.rng_seed = 21;
    const auto samples = linear_samples(300, 77);
    Network net = nnet::init_network(cfg);
    const auto report = nnet::train(net, samples, cfg);

    REQUIRE(report.stopped_by == StopReason::threshold_reached);
    REQUIRE(static_cast<int>(report.validation_history.size()) == report.epochs_run);
    for (std::size_t e = 0; e + 1 < report.validation_history.size(); ++e) {
        CHECK(report.validation_history[e] < cfg.accuracy_threshold);
    }
    CHECK(report.validation_history.back() >= cfg.accuracy_threshold);
    for (std::size_t e = 0; e + 1 < report.lr_history.size(); ++e) {
        CHECK(report.lr_history[e + 1] <= report.lr_history[e]);
    }
}

TEST_CASE("train: bit-identical reruns for the same seed") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.rng_seed = 1001;
    const auto samples = linear_samples(150, 8);

    Network a = nnet::init_network(cfg);
    const auto report_a = nnet::train(a, samples, cfg);
    Network b = nnet::init_network(cfg);
    const auto report_b = nnet::train(b, samples, cfg);

    CHECK(networks_identical(a, b));
    CHECK(report_a.epochs_run == report_b.epochs_run);
    CHECK(report_a.final_validation_score == report_b.final_validation_score);
    CHECK(report_a.validation_history == report_b.validation_history);

    NetworkConfig other = cfg;
    other.rng_seed = 1002;
    Network c = nnet::init_network(other);
    nnet::train(c, samples, other);
    CHECK_FALSE(networks_identical(a, c));
}

TEST_CASE("train: divergence reports the epoch") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    cfg.learning_rate_init = 1e9;
    cfg.rng_seed = 2;
    const auto samples = linear_samples(100, 66);
    Network net = nnet::init_network(cfg);
    try {
        nnet::train(net, samples, cfg);
        FAIL("expected TrainingError");
    } catch (const nnet::TrainingError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("train: sample validation") {
    NetworkConfig cfg;
    cfg.input_dim = 1;
    Network net = nnet::init_network(cfg);

    std::vector<Sample> few = linear_samples(9, 1);
    CHECK_THROWS_AS(nnet::train(net, few, cfg), std::invalid_argument);

    cfg.validation_fraction = 0.99;  // split leaves no training data
    std::vector<Sample> ten = linear_samples(10, 1);
    Network net2 = nnet::init_network(cfg);
    CHECK_THROWS_AS(nnet::train(net2, ten, cfg), std::invalid_argument);
}

TEST_CASE("config validation") {
    NetworkConfig cfg;
    cfg.accuracy_threshold = 1.01;
    CHECK_THROWS_AS(nnet::validate(cfg), std::invalid_argument);
    cfg = {};
    cfg.validation_fraction = 1.0;
    CHECK_THROWS_AS(nnet::validate(cfg), std::invalid_argument);
    cfg = {};
    cfg.hidden_units = 0;
    CHECK_THROWS_AS(nnet::validate(cfg), std::invalid_argument);
    cfg = {};
    cfg.lr_decay_factor = 1.0;
    CHECK_THROWS_AS(nnet::validate(cfg), std::invalid_argument);
}

TEST_CASE("affine scaler maps bounds to [-1,1] and round-trips") {
    const nnet::AffineScaler scale{-30.0, 1.0};
    CHECK(scale.to_unit(-30.0) == doctest::Approx(-1.0));
    CHECK(scale.to_unit(1.0) == doctest::Approx(1.0));
    CHECK(scale.to_unit(-14.5) == doctest::Approx(0.0));
    Rng rng(64);
    for (int k = 0; k < 200; ++k) {
        const double v = rng.uniform_real(-30.0, 1.0);
        CHECK(scale.from_unit(scale.to_unit(v)) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("network save/load round-trip") {
    const Network net = small_fixture();
    const auto path = std::filesystem::temp_directory_path() / "abm_net_roundtrip.txt";
    nnet::save_network(net, path.string());
    const Network loaded = nnet::load_network(path.string());
    CHECK(networks_identical(net, loaded));
    CHECK(nnet::forward(loaded, std::vector<double>{0.5, 0.25}) ==
          nnet::forward(net, std::vector<double>{0.5, 0.25}));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(nnet::load_network("/nonexistent/abm_net.txt"), std::runtime_error);
}
