#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "abm/rng.hpp"

namespace abm::nnet {

/// Training hyperparameters for the one-hidden-layer regressor.
///
/// The learning rate is "adaptive": whenever the validation score fails to
/// improve for `patience_epochs` consecutive epochs it is multiplied by
/// `lr_decay_factor`. Training stops at the first epoch whose validation
/// R^2 reaches `accuracy_threshold`, at `max_epochs`, or when the learning
/// rate decays below the floor.
struct NetworkConfig {
    int input_dim = 2;
    int hidden_units = 100;
    double learning_rate_init = 0.01;
    double lr_decay_factor = 0.2;
    int patience_epochs = 2;
    int max_epochs = 500;
    int batch_size = 32;
    double validation_fraction = 0.2;
    double accuracy_threshold = 0.99;
    double momentum = 0.9;
    std::uint64_t rng_seed = 0;
};

void validate(const NetworkConfig& cfg);

constexpr double kLearningRateFloor = 1e-6;

/// Scalar-output MLP with one rectifier hidden layer.
/// weights_hidden is row-major input_dim x hidden_units.
struct Network {
    int input_dim = 0;
    int hidden_units = 0;
    std::vector<double> weights_hidden;
    std::vector<double> bias_hidden;
    std::vector<double> weights_out;
    double bias_out = 0.0;
};

/// All-zero network of the given shape.
Network make_network(int input_dim, int hidden_units);

/// Glorot-uniform initialized network, seeded from cfg.rng_seed.
Network init_network(const NetworkConfig& cfg);

enum class StopReason { threshold_reached, max_epochs, lr_floor };

struct TrainReport {
    int epochs_run = 0;
    double final_validation_score = 0.0;
    StopReason stopped_by = StopReason::max_epochs;
    double final_learning_rate = 0.0;
    std::vector<double> validation_history;
    std::vector<double> lr_history;
};

struct Sample {
    std::vector<double> input;
    double target = 0.0;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double forward(const Network& net, std::span<const double> input);

/// Gradient of the squared error (prediction - target)^2 with respect to
/// every parameter, returned in a network-shaped container.
Network gradient(const Network& net, std::span<const double> input, double target);

/// Mini-batch SGD on mean squared error with a seeded hold-out validation
/// split. Mutates `net` in place; all randomness comes from cfg.rng_seed.
TrainReport train(Network& net, std::span<const Sample> samples, const NetworkConfig& cfg);

/// Validation metric: coefficient of determination R^2. Zero-variance
/// targets define R^2 as 1.0 if the MSE is below 1e-8, else 0.0.
double r2_score(std::span<const double> targets, std::span<const double> predictions);

/// Versioned text dump: header line with dims, then row-major parameters
/// with round-trip precision.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

/// Affine map between [lo, hi] and the network's working range [-1, 1].
struct AffineScaler {
    double lo = 0.0;
    double hi = 1.0;
    double to_unit(double v) const { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
    double from_unit(double u) const { return lo + (u + 1.0) * (hi - lo) / 2.0; }
};

}  // namespace abm::nnet
