#pragma once

#include <Eigen/Dense>

namespace simbench {

struct LeastSquaresResult {
    Eigen::VectorXd coefficients;
    double sse = 0.0;       // sum of squared residuals at the solution
    Eigen::Index rank = 0;  // numerical rank of the design matrix
};

/// Minimum-norm least-squares solution via a complete orthogonal
/// decomposition. Handles underdetermined designs (rows < cols)
/// deterministically. When the design has at least as many rows as columns
/// but is rank-deficient (e.g. a constant series making the lag columns
/// collinear with the intercept), a fit error is raised — such data cannot
/// identify the model. Underdetermined designs are allowed; the returned
/// interpolating solution is the caller's responsibility.
LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& response);

} // namespace simbench
