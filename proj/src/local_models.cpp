#include "simbench/local_models.hpp"

#include "simbench/errors.hpp"
#include "simbench/linreg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace simbench {

LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& response) {
    if (design.rows() != response.size()) {
        throw ParameterError("least squares: design/response row mismatch");
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    if (design.rows() >= design.cols() && cod.rank() < design.cols()) {
        throw FitError("singular design matrix (rank " + std::to_string(cod.rank()) + " < " +
                       std::to_string(design.cols()) + " columns)");
    }
    LeastSquaresResult result;
    result.coefficients = cod.solve(response);
    result.rank = cod.rank();
    result.sse = (response - design * result.coefficients).squaredNorm();
    return result;
}

namespace {

/// Builds the lagged design for rows t = first_row..n-1 with predictors at
/// lags stride, 2*stride, ..., p*stride plus an intercept column.
void build_lag_design(std::span<const double> series, int p, int stride, Eigen::MatrixXd& design,
                      Eigen::VectorXd& response) {
    const int n = static_cast<int>(series.size());
    const int max_lag = p * stride;
    const int rows = n - max_lag;
    design.resize(rows, p + 1);
    response.resize(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = max_lag + r;
        design(r, 0) = 1.0;
        for (int k = 0; k < p; ++k) {
            design(r, k + 1) = series[static_cast<std::size_t>(t - (k + 1) * stride)];
        }
        response(r) = series[static_cast<std::size_t>(t)];
    }
}

FittedAr fit_lagged(std::span<const double> series, int p, int stride) {
    if (p < 1) throw ParameterError("autoregressive order must be >= 1");
    if (stride < 1) throw ParameterError("lag stride must be >= 1");
    const int n = static_cast<int>(series.size());
    if (n < p * stride + 2) {
        throw ParameterError("series too short to fit: need at least " +
                             std::to_string(p * stride + 2) + " points, have " +
                             std::to_string(n));
    }
    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    build_lag_design(series, p, stride, design, response);
    const LeastSquaresResult ls = solve_least_squares(design, response);

    FittedAr fitted;
    fitted.intercept = ls.coefficients(0);
    fitted.phi.assign(ls.coefficients.data() + 1, ls.coefficients.data() + 1 + p);
    fitted.lag_stride = stride;
    fitted.total_sse = ls.sse;
    fitted.residual_variance = ls.sse / static_cast<double>(design.rows());
    return fitted;
}

double quantile(std::vector<double> sorted, double q) {
    // R's default (type 7) interpolated quantile; input must be sorted.
    const double position = q * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(position);
    const double fraction = position - static_cast<double>(lower);
    if (lower + 1 >= sorted.size()) return sorted.back();
    return sorted[lower] + fraction * (sorted[lower + 1] - sorted[lower]);
}

} // namespace

FittedAr fit_ar(std::span<const double> series, int p) { return fit_lagged(series, p, 1); }

FittedAr fit_sar(std::span<const double> series, int P, int S) {
    return fit_lagged(series, P, S);
}

FittedSetar fit_setar(std::span<const double> series, int regime_order, int delay) {
    if (regime_order < 1) throw ParameterError("regime order must be >= 1");
    if (delay < 1) throw ParameterError("delay must be >= 1");
    const int n = static_cast<int>(series.size());
    if (n < 30) throw ParameterError("threshold AR fit needs at least 30 observations");

    const int max_lag = std::max(regime_order, delay);
    const int rows = n - max_lag;
    Eigen::MatrixXd design(rows, regime_order + 1);
    Eigen::VectorXd response(rows);
    std::vector<double> delayed(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        const int t = max_lag + r;
        design(r, 0) = 1.0;
        for (int k = 0; k < regime_order; ++k) {
            design(r, k + 1) = series[static_cast<std::size_t>(t - (k + 1))];
        }
        response(r) = series[static_cast<std::size_t>(t)];
        delayed[static_cast<std::size_t>(r)] = series[static_cast<std::size_t>(t - delay)];
    }

    std::vector<double> sorted = delayed;
    std::sort(sorted.begin(), sorted.end());

    constexpr int kMinRegimeRows = 10;
    FittedSetar best;
    best.delay = delay;
    double best_sse = std::numeric_limits<double>::infinity();

    for (int step = 0; step < 8; ++step) {
        const double q = 0.15 + 0.10 * step; // decile grid, 15% trimmed at both ends
        ThresholdCandidate candidate;
        candidate.threshold = quantile(sorted, q);
        std::vector<int> lower_rows, upper_rows;
        for (int r = 0; r < rows; ++r) {
            (delayed[static_cast<std::size_t>(r)] <= candidate.threshold ? lower_rows
                                                                         : upper_rows)
                .push_back(r);
        }
        candidate.lower_count = static_cast<int>(lower_rows.size());
        candidate.upper_count = static_cast<int>(upper_rows.size());
        candidate.feasible =
            candidate.lower_count >= kMinRegimeRows && candidate.upper_count >= kMinRegimeRows;
        if (candidate.feasible) {
            double pooled_sse = 0.0;
            std::vector<FittedAr> regimes;
            bool degenerate = false;
            for (const auto* rows_of_regime : {&lower_rows, &upper_rows}) {
                Eigen::MatrixXd sub_design(rows_of_regime->size(), regime_order + 1);
                Eigen::VectorXd sub_response(rows_of_regime->size());
                for (std::size_t i = 0; i < rows_of_regime->size(); ++i) {
                    sub_design.row(static_cast<Eigen::Index>(i)) =
                        design.row((*rows_of_regime)[i]);
                    sub_response(static_cast<Eigen::Index>(i)) = response((*rows_of_regime)[i]);
                }
                try {
                    const LeastSquaresResult ls = solve_least_squares(sub_design, sub_response);
                    FittedAr regime;
                    regime.intercept = ls.coefficients(0);
                    regime.phi.assign(ls.coefficients.data() + 1,
                                      ls.coefficients.data() + 1 + regime_order);
                    regime.total_sse = ls.sse;
                    regime.residual_variance =
                        ls.sse / static_cast<double>(rows_of_regime->size());
                    pooled_sse += ls.sse;
                    regimes.push_back(std::move(regime));
                } catch (const FitError&) {
                    degenerate = true;
                    break;
                }
            }
            candidate.sse = degenerate ? std::numeric_limits<double>::quiet_NaN() : pooled_sse;
            candidate.feasible = !degenerate;
            if (!degenerate && pooled_sse < best_sse) {
                best_sse = pooled_sse;
                best.regimes = std::move(regimes);
                best.threshold = candidate.threshold;
                best.total_sse = pooled_sse;
            }
        }
        best.threshold_grid.push_back(candidate);
    }

    if (best.regimes.empty()) {
        throw FitError("no threshold candidate left both regimes with >= " +
                       std::to_string(kMinRegimeRows) + " observations");
    }
    return best;
}

std::vector<double> forecast_recursive(const FittedAr& model, std::span<const double> tail,
                                       int horizon) {
    if (horizon < 1) throw ParameterError("forecast horizon must be >= 1");
    const int needed = model.max_lag();
    if (static_cast<int>(tail.size()) < needed) {
        throw ParameterError("forecast tail shorter than the model's largest lag");
    }
    std::vector<double> history(tail.end() - needed, tail.end());
    std::vector<double> forecasts;
    forecasts.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        double y = model.intercept;
        for (int k = 0; k < model.order(); ++k) {
            y += model.phi[static_cast<std::size_t>(k)] *
                 history[history.size() - static_cast<std::size_t>((k + 1) * model.lag_stride)];
        }
        if (!std::isfinite(y)) throw NumericError("recursive forecast diverged");
        if (needed > 0) {
            history.erase(history.begin());
            history.push_back(y);
        }
        forecasts.push_back(y);
    }
    return forecasts;
}

std::vector<double> forecast_recursive(const FittedSetar& model, std::span<const double> tail,
                                       int horizon) {
    if (horizon < 1) throw ParameterError("forecast horizon must be >= 1");
    if (model.regimes.size() != 2) throw ParameterError("threshold model needs two regimes");
    int needed = model.delay;
    for (const auto& regime : model.regimes) needed = std::max(needed, regime.max_lag());
    if (static_cast<int>(tail.size()) < needed) {
        throw ParameterError("forecast tail shorter than the model's largest lag");
    }
    std::vector<double> history(tail.end() - needed, tail.end());
    std::vector<double> forecasts;
    forecasts.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const double delayed = history[history.size() - static_cast<std::size_t>(model.delay)];
        const FittedAr& regime = delayed <= model.threshold ? model.regimes[0] : model.regimes[1];
        double y = regime.intercept;
        for (int k = 0; k < regime.order(); ++k) {
            y += regime.phi[static_cast<std::size_t>(k)] *
                 history[history.size() - static_cast<std::size_t>(k + 1)];
        }
        if (!std::isfinite(y)) throw NumericError("recursive forecast diverged");
        history.erase(history.begin());
        history.push_back(y);
        forecasts.push_back(y);
    }
    return forecasts;
}

std::string FittedAr::describe() const {
    nlohmann::json j = {{"intercept", intercept},
                        {"phi", phi},
                        {"lag_stride", lag_stride},
                        {"residual_variance", residual_variance}};
    return j.dump();
}

std::string FittedSetar::describe() const {
    nlohmann::json regimes_json = nlohmann::json::array();
    for (const auto& regime : regimes) {
        regimes_json.push_back({{"intercept", regime.intercept}, {"phi", regime.phi}});
    }
    nlohmann::json j = {{"regimes", regimes_json}, {"threshold", threshold}, {"delay", delay}};
    return j.dump();
}

} // namespace simbench
