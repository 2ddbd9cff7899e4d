#pragma once

#include "simbench/local_models.hpp"
#include "simbench/preprocess.hpp"

#include <Eigen/Dense>

namespace simbench {

/// Linear autoregression fitted by least squares on one-step windows pooled
/// across every training series.
struct PooledRegressionModel {
    int window_size = 0;
    double intercept = 0.0;
    Eigen::VectorXd theta; // aligned with window inputs, oldest value first
    double total_sse = 0.0;

    /// View as a lag-coefficient model: theta is stored oldest-first, so the
    /// coefficient on lag k (most recent = 1) is theta[window_size - k].
    FittedAr as_ar() const;
};

/// Fits on a one-step window batch (output_size must be 1). Requires at
/// least window_size + 2 pooled rows.
PooledRegressionModel fit_pooled_regression(const WindowBatch& batch);

} // namespace simbench
