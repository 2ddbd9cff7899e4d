#pragma once

#include <span>
#include <string>
#include <vector>

namespace simbench {

/// A fitted linear autoregression on lags {stride, 2*stride, ..., p*stride}.
/// stride = 1 is the plain AR(p); stride = S is the purely seasonal variant.
struct FittedAr {
    double intercept = 0.0;
    std::vector<double> phi;
    int lag_stride = 1;
    double residual_variance = 0.0; // mean squared one-step residual
    double total_sse = 0.0;         // conditional least-squares objective

    int order() const { return static_cast<int>(phi.size()); }
    int max_lag() const { return order() * lag_stride; }

    /// Structured text dump (JSON) for inspection.
    std::string describe() const;
};

/// One candidate evaluated during the threshold search.
struct ThresholdCandidate {
    double threshold = 0.0;
    double sse = 0.0;
    int lower_count = 0;
    int upper_count = 0;
    bool feasible = false; // both regimes had enough observations
};

/// A fitted two-regime threshold autoregression: regime 0 applies when the
/// delayed value is <= threshold, regime 1 otherwise.
struct FittedSetar {
    std::vector<FittedAr> regimes; // exactly 2
    double threshold = 0.0;
    int delay = 1;
    double total_sse = 0.0;
    std::vector<ThresholdCandidate> threshold_grid; // full search record

    std::string describe() const;
};

/// Conditional least squares for an AR(p): minimizes the squared one-step
/// error over rows t = p+1..T. Requires length >= p + 2. Rank-deficient
/// designs with enough rows (constant series) raise a fit error;
/// underdetermined short-series designs return the minimum-norm solution.
FittedAr fit_ar(std::span<const double> series, int p);

/// Least squares on the seasonal lags S, 2S, ..., PS. S = 1 reduces to
/// fit_ar(p = P).
FittedAr fit_sar(std::span<const double> series, int P, int S);

/// Two-regime threshold AR fit: the threshold grid is the set of decile
/// quantiles (15%..85%, 15% trimming) of the delayed regressor; for each
/// candidate both regimes are refit by least squares and the candidate with
/// the smallest pooled squared error wins. Candidates leaving either regime
/// fewer than 10 observations are infeasible; if none is feasible the fit
/// fails.
FittedSetar fit_setar(std::span<const double> series, int regime_order = 2, int delay = 1);

/// H-step recursive forecasts: step h feeds the forecasts of steps < h back
/// as inputs. The tail must cover the model's largest lag.
std::vector<double> forecast_recursive(const FittedAr& model, std::span<const double> tail,
                                       int horizon);
std::vector<double> forecast_recursive(const FittedSetar& model, std::span<const double> tail,
                                       int horizon);

} // namespace simbench
