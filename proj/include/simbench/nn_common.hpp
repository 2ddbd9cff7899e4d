#pragma once

#include "simbench/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace simbench {

/// Shared training knobs for the gradient-trained networks.
struct NnTrainingConfig {
    int epochs = 50;
    int epoch_size = 1; // whole-dataset repetitions within one epoch
    int minibatch = 1;  // rows (feed-forward) or series sequences (recurrent)
    double learning_rate = 0.001;
    double l2_lambda = 0.0001;
    double input_noise_std = 0.0001;
    double init_std = 0.0001;
    std::uint64_t seed = 1;
};

/// First-order adaptive optimizer state over a flat parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(Eigen::Index size, double learning_rate, double beta1 = 0.9,
                  double beta2 = 0.999, double epsilon = 1e-8)
        : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2),
          epsilon_(epsilon), m_(Eigen::VectorXd::Zero(size)),
          v_(Eigen::VectorXd::Zero(size)) {}

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double correction1 = 1.0 - std::pow(beta1_, t_);
        const double correction2 = 1.0 - std::pow(beta2_, t_);
        for (Eigen::Index i = 0; i < params.size(); ++i) {
            const double m_hat = m_[i] / correction1;
            const double v_hat = v_[i] / correction2;
            params[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
        }
    }

private:
    double learning_rate_;
    double beta1_;
    double beta2_;
    double epsilon_;
    long t_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

/// Rescales the gradient in place when its global L2 norm exceeds max_norm.
inline void clip_gradient_norm(Eigen::VectorXd& grad, double max_norm) {
    const double norm = grad.norm();
    if (norm > max_norm && norm > 0.0) {
        grad *= max_norm / norm;
    }
}

/// Deterministic Fisher-Yates shuffle driven by the project RNG.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace simbench
