#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "corn/tensor.hpp"

namespace corn {

template <typename Real>
struct AdamConfig {
    Real learning_rate = Real(1e-3);
    Real beta1 = Real(0.9);
    Real beta2 = Real(0.999);
    Real epsilon = Real(1e-8);
    Real weight_decay = Real(0);  // decoupled; 0 reduces to plain adaptive-moment updates
};

/// Bias-corrected adaptive-moment optimizer with decoupled weight decay:
///   p <- p - lr * ( m_hat / (sqrt(v_hat) + eps) + wd * p )
/// With weight_decay = 0 this is the plain method, bitwise. Decay is applied
/// only where the decay mask is true (weights, not biases).
template <typename Real>
class AdamW {
public:
    AdamW(std::vector<Tensor<Real>> params, std::vector<bool> decay_mask, AdamConfig<Real> config)
        : params_(std::move(params)), decay_mask_(std::move(decay_mask)), config_(config) {
        if (!(config_.learning_rate > Real(0))) {
            throw std::invalid_argument("optimizer: learning rate must be positive");
        }
        if (decay_mask_.size() != params_.size()) {
            throw std::invalid_argument("optimizer: decay mask size must match parameter count");
        }
        for (const auto& p : params_) {
            moment1_.emplace_back(p.size(), Real(0));
            moment2_.emplace_back(p.size(), Real(0));
        }
    }

    /// One update from the gradients currently stored on the parameters.
    void step() {
        ++step_count_;
        const Real bc1 = Real(1) - std::pow(config_.beta1, static_cast<Real>(step_count_));
        const Real bc2 = Real(1) - std::pow(config_.beta2, static_cast<Real>(step_count_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            auto& values = params_[p].values();
            const auto& grad = params_[p].grad();
            auto& m = moment1_[p];
            auto& v = moment2_[p];
            const Real wd = decay_mask_[p] ? config_.weight_decay : Real(0);
            for (std::size_t i = 0; i < values.size(); ++i) {
                const Real g = grad[i];
                m[i] = config_.beta1 * m[i] + (Real(1) - config_.beta1) * g;
                v[i] = config_.beta2 * v[i] + (Real(1) - config_.beta2) * g * g;
                const Real m_hat = m[i] / bc1;
                const Real v_hat = v[i] / bc2;
                values[i] -= config_.learning_rate *
                             (m_hat / (std::sqrt(v_hat) + config_.epsilon) + wd * values[i]);
            }
        }
    }

    std::size_t step_count() const { return step_count_; }
    const AdamConfig<Real>& config() const { return config_; }

private:
    std::vector<Tensor<Real>> params_;
    std::vector<bool> decay_mask_;
    AdamConfig<Real> config_;
    std::vector<std::vector<Real>> moment1_;
    std::vector<std::vector<Real>> moment2_;
    std::size_t step_count_ = 0;
};

}  // namespace corn
