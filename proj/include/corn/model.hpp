#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "corn/losses.hpp"
#include "corn/rng.hpp"
#include "corn/tensor.hpp"

namespace corn {

template <typename Real>
struct MlpConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;  // one or two hidden layers
    Real leaky_slope = Real(0.01);
    Real dropout_p = Real(0.2);
    HeadKind head = HeadKind::Corn;
    int num_ranks = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_dim == 0) throw std::invalid_argument("mlp config: input_dim must be positive");
        if (hidden_dims.empty() || hidden_dims.size() > 2) {
            throw std::invalid_argument("mlp config: expected one or two hidden layers, got " +
                                        std::to_string(hidden_dims.size()));
        }
        for (const std::size_t h : hidden_dims) {
            if (h == 0) throw std::invalid_argument("mlp config: hidden width must be positive");
        }
        if (num_ranks < 2) throw std::invalid_argument("mlp config: need K >= 2 ranks");
        if (!(dropout_p >= Real(0) && dropout_p < Real(1))) {
            throw std::invalid_argument("mlp config: dropout_p must lie in [0,1)");
        }
        if (!(leaky_slope > Real(0) && leaky_slope < Real(1))) {
            throw std::invalid_argument("mlp config: leaky_slope must lie in (0,1)");
        }
    }
};

/// Fully connected net: per hidden layer affine -> leaky ReLU -> dropout
/// (train mode only), then a head-specific affine output with no activation;
/// the losses consume raw logits.
///
/// Head widths: Corn/OrNn emit K-1 independent task logits, CrossEntropy
/// emits K class logits, Coral emits one shared logit plus a 1x(K-1) row of
/// task biases (the output weights are shared across tasks).
template <typename Real>
class MlpModel {
public:
    struct Layer {
        Tensor<Real> weight;  // fan_in x fan_out
        Tensor<Real> bias;    // 1 x fan_out
    };

    /// Empty model; assign an init() result before use.
    MlpModel() : dropout_rng_(0) {}

    struct Forward {
        Tensor<Real> logits;  // batch x head width (Coral: expanded per-task logits)
        Tensor<Real> shared;  // Coral only: batch x 1 shared logit; undefined otherwise
        std::vector<Tensor<Real>> hidden_pre;  // pre-activation of each hidden layer
    };

    /// Weights uniform in +-sqrt(1/fan_in), biases zero; deterministic in
    /// config.seed. Dropout draws from an independent stream of the same seed.
    static MlpModel init(const MlpConfig<Real>& config) {
        config.validate();
        MlpModel model(config);
        Rng rng(mix_seed(config.seed, kInitStream));
        std::size_t fan_in = config.input_dim;
        for (const std::size_t width : config.hidden_dims) {
            model.hidden_.push_back(make_layer(fan_in, width, rng));
            fan_in = width;
        }
        if (config.head == HeadKind::Coral) {
            model.output_ = make_layer(fan_in, 1, rng);
            // Task biases replace the single affine bias.
            model.output_.bias =
                Tensor<Real>::zeros(1, static_cast<std::size_t>(config.num_ranks - 1), true);
        } else {
            model.output_ = make_layer(fan_in, head_output_width(config.head, config.num_ranks), rng);
        }
        return model;
    }

    Forward forward(Tape<Real>& tape, const Tensor<Real>& x) {
        if (x.cols() != config_.input_dim) {
            throw std::invalid_argument("mlp forward: expected " +
                                        std::to_string(config_.input_dim) + " feature columns, got " +
                                        std::to_string(x.cols()));
        }
        Forward out;
        Tensor<Real> h = x;
        for (const Layer& layer : hidden_) {
            h = tape.add_row(tape.matmul(h, layer.weight), layer.bias);
            out.hidden_pre.push_back(h);
            h = tape.leaky_relu(h, config_.leaky_slope);
            h = tape.dropout(h, config_.dropout_p, training_, dropout_rng_);
        }
        if (config_.head == HeadKind::Coral) {
            out.shared = tape.matmul(h, output_.weight);
            out.logits = coral_task_logits(tape, out.shared, output_.bias);
        } else {
            out.logits = tape.add_row(tape.matmul(h, output_.weight), output_.bias);
        }
        return out;
    }

    void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }

    const MlpConfig<Real>& config() const { return config_; }
    const std::vector<Layer>& hidden_layers() const { return hidden_; }
    const Layer& output_layer() const { return output_; }

    /// Coral task-bias row (1 x K-1).
    const Tensor<Real>& task_biases() const {
        if (config_.head != HeadKind::Coral) {
            throw std::logic_error("task_biases: model head is not coral");
        }
        return output_.bias;
    }

    /// All trainable tensors, layer by layer: weight, bias, ..., out weight,
    /// out bias.
    std::vector<Tensor<Real>> parameters() {
        std::vector<Tensor<Real>> params;
        for (Layer& layer : hidden_) {
            params.push_back(layer.weight);
            params.push_back(layer.bias);
        }
        params.push_back(output_.weight);
        params.push_back(output_.bias);
        return params;
    }

    /// Parallel to parameters(): true for weight matrices, false for biases.
    /// Weight decay applies to weights only.
    std::vector<bool> weight_decay_mask() const {
        std::vector<bool> mask;
        for (std::size_t i = 0; i < hidden_.size(); ++i) {
            mask.push_back(true);
            mask.push_back(false);
        }
        mask.push_back(true);
        mask.push_back(false);
        return mask;
    }

    void zero_grad() {
        for (auto& p : parameters()) p.zero_grad();
    }

    /// Overwrites parameter values from a snapshot taken with
    /// snapshot_parameters().
    void restore_parameters(const std::vector<std::vector<Real>>& snapshot) {
        auto params = parameters();
        if (snapshot.size() != params.size()) {
            throw std::invalid_argument("parameter snapshot has wrong tensor count");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (snapshot[i].size() != params[i].size()) {
                throw std::invalid_argument("parameter snapshot has wrong tensor shape");
            }
            params[i].values() = snapshot[i];
        }
    }

    std::vector<std::vector<Real>> snapshot_parameters() {
        std::vector<std::vector<Real>> snapshot;
        for (auto& p : parameters()) snapshot.push_back(p.values());
        return snapshot;
    }

private:
    static constexpr std::uint64_t kInitStream = 1;
    static constexpr std::uint64_t kDropoutStream = 2;

    explicit MlpModel(const MlpConfig<Real>& config)
        : config_(config), dropout_rng_(mix_seed(config.seed, kDropoutStream)) {}

    static Layer make_layer(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        std::vector<Real> w(fan_in * fan_out);
        for (Real& v : w) v = static_cast<Real>(rng.uniform(-bound, bound));
        Layer layer;
        layer.weight = Tensor<Real>::from(fan_in, fan_out, std::move(w), true);
        layer.bias = Tensor<Real>::zeros(1, fan_out, true);
        return layer;
    }

    MlpConfig<Real> config_;
    std::vector<Layer> hidden_;
    Layer output_;
    bool training_ = false;
    Rng dropout_rng_;
};

}  // namespace corn
