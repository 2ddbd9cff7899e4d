#include "simbench/pooled.hpp"

#include "simbench/errors.hpp"
#include "simbench/linreg.hpp"

namespace simbench {

FittedAr PooledRegressionModel::as_ar() const {
    FittedAr model;
    model.intercept = intercept;
    model.lag_stride = 1;
    model.phi.resize(static_cast<std::size_t>(window_size));
    for (int k = 0; k < window_size; ++k) {
        model.phi[static_cast<std::size_t>(k)] = theta[window_size - 1 - k];
    }
    model.total_sse = total_sse;
    return model;
}

PooledRegressionModel fit_pooled_regression(const WindowBatch& batch) {
    if (batch.output_size != 1) {
        throw ParameterError("pooled regression expects one-step windows, got output size " +
                             std::to_string(batch.output_size));
    }
    const Eigen::Index rows = batch.inputs.rows();
    const Eigen::Index m = batch.inputs.cols();
    if (rows < m + 2) {
        throw ParameterError("pooled regression needs at least " + std::to_string(m + 2) +
                             " windows, got " + std::to_string(rows));
    }
    Eigen::MatrixXd design(rows, m + 1);
    design.col(0).setOnes();
    design.rightCols(m) = batch.inputs;
    const LeastSquaresResult solution =
        solve_least_squares(design, batch.targets.col(0));

    PooledRegressionModel model;
    model.window_size = static_cast<int>(m);
    model.intercept = solution.coefficients[0];
    model.theta = solution.coefficients.tail(m);
    model.total_sse = solution.sse;
    return model;
}

} // namespace simbench
