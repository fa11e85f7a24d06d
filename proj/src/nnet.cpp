#include "abm/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace abm::nnet {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;

void check_finite_input(std::span<const double> input) {
    for (double v : input) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite network input");
    }
}

bool all_finite(const Network& net) {
    auto ok = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(net.weights_hidden) && ok(net.bias_hidden) && ok(net.weights_out) &&
           std::isfinite(net.bias_out);
}

/// Forward pass that also records the hidden activations. Shared by the
/// public forward(), gradient() and the training loop so the three can
/// never drift apart.
double forward_into(const Network& net, std::span<const double> input,
                    std::vector<double>& hidden) {
    hidden.assign(static_cast<std::size_t>(net.hidden_units), 0.0);
    for (int i = 0; i < net.input_dim; ++i) {
        const double x = input[static_cast<std::size_t>(i)];
        const double* w = &net.weights_hidden[static_cast<std::size_t>(i) *
                                              static_cast<std::size_t>(net.hidden_units)];
        for (int j = 0; j < net.hidden_units; ++j) {
            hidden[static_cast<std::size_t>(j)] += w[j] * x;
        }
    }
    double out = net.bias_out;
    for (int j = 0; j < net.hidden_units; ++j) {
        double h = hidden[static_cast<std::size_t>(j)] + net.bias_hidden[static_cast<std::size_t>(j)];
        h = h > 0.0 ? h : 0.0;  // rectifier
        hidden[static_cast<std::size_t>(j)] = h;
        out += net.weights_out[static_cast<std::size_t>(j)] * h;
    }
    return out;
}

/// Accumulates the squared-error gradient of one sample into `grad`
/// (network-shaped).
void accumulate_gradient(const Network& net, std::span<const double> input, double target,
                         std::vector<double>& hidden, Network& grad) {
    const double pred = forward_into(net, input, hidden);
    const double dloss = 2.0 * (pred - target);  // d/dpred of (pred - target)^2

    grad.bias_out += dloss;
    for (int j = 0; j < net.hidden_units; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double h = hidden[ju];
        grad.weights_out[ju] += dloss * h;
        if (h > 0.0) {
            const double dh = dloss * net.weights_out[ju];
            grad.bias_hidden[ju] += dh;
            for (int i = 0; i < net.input_dim; ++i) {
                grad.weights_hidden[static_cast<std::size_t>(i) *
                                        static_cast<std::size_t>(net.hidden_units) +
                                    ju] += dh * input[static_cast<std::size_t>(i)];
            }
        }
    }
}

void scale_params(Network& net, double s) {
    for (double& w : net.weights_hidden) w *= s;
    for (double& b : net.bias_hidden) b *= s;
    for (double& w : net.weights_out) w *= s;
    net.bias_out *= s;
}

void axpy_params(Network& dst, const Network& src, double a) {
    for (std::size_t k = 0; k < dst.weights_hidden.size(); ++k) dst.weights_hidden[k] += a * src.weights_hidden[k];
    for (std::size_t k = 0; k < dst.bias_hidden.size(); ++k) dst.bias_hidden[k] += a * src.bias_hidden[k];
    for (std::size_t k = 0; k < dst.weights_out.size(); ++k) dst.weights_out[k] += a * src.weights_out[k];
    dst.bias_out += a * src.bias_out;
}

void zero_params(Network& net) {
    std::fill(net.weights_hidden.begin(), net.weights_hidden.end(), 0.0);
    std::fill(net.bias_hidden.begin(), net.bias_hidden.end(), 0.0);
    std::fill(net.weights_out.begin(), net.weights_out.end(), 0.0);
    net.bias_out = 0.0;
}

}  // namespace

void validate(const NetworkConfig& cfg) {
    if (cfg.input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (cfg.hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
    if (!(cfg.learning_rate_init > 0.0)) throw std::invalid_argument("learning_rate_init must be positive");
    if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor < 1.0)) {
        throw std::invalid_argument("lr_decay_factor must be in (0,1)");
    }
    if (cfg.patience_epochs < 1) throw std::invalid_argument("patience_epochs must be >= 1");
    if (cfg.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
        throw std::invalid_argument("validation_fraction must be in (0,1)");
    }
    if (!(cfg.accuracy_threshold > 0.0 && cfg.accuracy_threshold <= 1.0)) {
        throw std::invalid_argument("accuracy_threshold must be in (0,1]");
    }
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw std::invalid_argument("momentum must be in [0,1)");
    }
}

Network make_network(int input_dim, int hidden_units) {
    if (input_dim < 1 || hidden_units < 1) {
        throw std::invalid_argument("network dims must be >= 1");
    }
    Network net;
    net.input_dim = input_dim;
    net.hidden_units = hidden_units;
    net.weights_hidden.assign(static_cast<std::size_t>(input_dim) * hidden_units, 0.0);
    net.bias_hidden.assign(static_cast<std::size_t>(hidden_units), 0.0);
    net.weights_out.assign(static_cast<std::size_t>(hidden_units), 0.0);
    return net;
}

Network init_network(const NetworkConfig& cfg) {
    validate(cfg);
    Network net = make_network(cfg.input_dim, cfg.hidden_units);
    Rng rng(derive_seed(cfg.rng_seed, kInitStream));
    const double bound_hidden = std::sqrt(6.0 / (cfg.input_dim + cfg.hidden_units));
    const double bound_out = std::sqrt(6.0 / (cfg.hidden_units + 1));
    for (double& w : net.weights_hidden) w = rng.uniform_real(-bound_hidden, bound_hidden);
    for (double& b : net.bias_hidden) b = rng.uniform_real(-bound_hidden, bound_hidden);
    for (double& w : net.weights_out) w = rng.uniform_real(-bound_out, bound_out);
    net.bias_out = rng.uniform_real(-bound_out, bound_out);
    return net;
}

double forward(const Network& net, std::span<const double> input) {
    if (input.size() != static_cast<std::size_t>(net.input_dim)) {
        throw std::invalid_argument("input length does not match network input_dim");
    }
    check_finite_input(input);
    std::vector<double> hidden;
    return forward_into(net, input, hidden);
}

Network gradient(const Network& net, std::span<const double> input, double target) {
    if (input.size() != static_cast<std::size_t>(net.input_dim)) {
        throw std::invalid_argument("input length does not match network input_dim");
    }
    check_finite_input(input);
    if (!std::isfinite(target)) throw std::invalid_argument("non-finite target");
    Network grad = make_network(net.input_dim, net.hidden_units);
    std::vector<double> hidden;
    accumulate_gradient(net, input, target, hidden, grad);
    return grad;
}

double r2_score(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.size() != predictions.size() || targets.empty()) {
        throw std::invalid_argument("r2_score: size mismatch or empty input");
    }
    const auto n = static_cast<double>(targets.size());
    const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double r = targets[i] - predictions[i];
        const double d = targets[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    // Constant targets have no variance to explain; float noise in the mean
    // keeps ss_tot from being exactly zero, hence the relative cutoff.
    if (ss_tot / n <= 1e-18 * std::max(1.0, mean * mean)) {
        return ss_res / n < 1e-8 ? 1.0 : 0.0;
    }
    return 1.0 - ss_res / ss_tot;
}

TrainReport train(Network& net, std::span<const Sample> samples, const NetworkConfig& cfg) {
    validate(cfg);
    if (net.input_dim != cfg.input_dim || net.hidden_units != cfg.hidden_units) {
        throw std::invalid_argument("network shape does not match config");
    }
    if (samples.size() < 10) {
        throw std::invalid_argument("need at least 10 samples, got " +
                                    std::to_string(samples.size()));
    }
    for (const Sample& s : samples) {
        if (s.input.size() != static_cast<std::size_t>(cfg.input_dim)) {
            throw std::invalid_argument("sample input length does not match input_dim");
        }
        check_finite_input(s.input);
        if (!std::isfinite(s.target)) throw std::invalid_argument("non-finite sample target");
    }

    const auto n = samples.size();
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * cfg.validation_fraction)));
    if (n_val >= n) {
        throw std::invalid_argument("validation split leaves no training samples");
    }

    Rng rng(derive_seed(cfg.rng_seed, kShuffleStream));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    std::vector<double> val_targets(n_val);
    for (std::size_t i = 0; i < n_val; ++i) val_targets[i] = samples[val_idx[i]].target;

    Network grad = make_network(cfg.input_dim, cfg.hidden_units);
    Network velocity = make_network(cfg.input_dim, cfg.hidden_units);
    std::vector<double> hidden;
    std::vector<double> val_pred(n_val);

    TrainReport report;
    double lr = cfg.learning_rate_init;
    double best_score = -std::numeric_limits<double>::infinity();
    int epochs_without_improvement = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
            zero_params(grad);
            for (std::size_t k = start; k < stop; ++k) {
                const Sample& s = samples[train_idx[k]];
                accumulate_gradient(net, s.input, s.target, hidden, grad);
            }
            const double step = lr / static_cast<double>(stop - start);
            if (cfg.momentum > 0.0) {
                scale_params(velocity, cfg.momentum);
                axpy_params(velocity, grad, -step);
                axpy_params(net, velocity, 1.0);
            } else {
                axpy_params(net, grad, -step);
            }
        }

        if (!all_finite(net)) {
            throw TrainingError("training diverged: non-finite parameters at epoch " +
                                std::to_string(epoch));
        }

        for (std::size_t i = 0; i < n_val; ++i) {
            val_pred[i] = forward_into(net, samples[val_idx[i]].input, hidden);
        }
        const double score = r2_score(val_targets, val_pred);
        if (!std::isfinite(score)) {
            throw TrainingError("training diverged: non-finite validation score at epoch " +
                                std::to_string(epoch));
        }

        report.epochs_run = epoch;
        report.final_validation_score = score;
        report.validation_history.push_back(score);
        report.lr_history.push_back(lr);

        if (score >= cfg.accuracy_threshold) {
            report.stopped_by = StopReason::threshold_reached;
            report.final_learning_rate = lr;
            return report;
        }

        if (score > best_score) {
            best_score = score;
            epochs_without_improvement = 0;
        } else if (++epochs_without_improvement >= cfg.patience_epochs) {
            lr *= cfg.lr_decay_factor;
            epochs_without_improvement = 0;
            if (lr < kLearningRateFloor) {
                report.stopped_by = StopReason::lr_floor;
                report.final_learning_rate = lr;
                return report;
            }
        }
    }

    report.stopped_by = StopReason::max_epochs;
    report.final_learning_rate = lr;
    return report;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "abm-net 1 " << net.input_dim << ' ' << net.hidden_units << '\n';
    out.precision(std::numeric_limits<double>::max_digits10);
    for (double w : net.weights_hidden) out << w << '\n';
    for (double b : net.bias_hidden) out << b << '\n';
    for (double w : net.weights_out) out << w << '\n';
    out << net.bias_out << '\n';
    if (!out) throw std::runtime_error("failed writing network to " + path);
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    int version = 0;
    int input_dim = 0;
    int hidden = 0;
    in >> magic >> version >> input_dim >> hidden;
    if (!in || magic != "abm-net" || version != 1) {
        throw std::runtime_error("not an abm-net v1 file: " + path);
    }
    Network net = make_network(input_dim, hidden);
    for (double& w : net.weights_hidden) in >> w;
    for (double& b : net.bias_hidden) in >> b;
    for (double& w : net.weights_out) in >> w;
    in >> net.bias_out;
    if (!in) throw std::runtime_error("truncated network file: " + path);
    return net;
}

}  // namespace abm::nnet
