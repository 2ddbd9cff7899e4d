#pragma once

#include "simbench/series.hpp"

#include <span>
#include <string>
#include <vector>

namespace simbench {

/// Symmetric mean absolute percentage error (in percent):
///   100/H * sum |F-Y| / ((|Y|+|F|)/2).
/// A step where |Y|+|F| = 0 has an undefined ratio; callers working with
/// zero-containing data must use smape_variant instead.
double smape(std::span<const double> forecasts, std::span<const double> actuals);

/// Zero-safe variant: the per-step denominator is replaced by
///   max(|Y|+|F|+eps, 0.5+eps).
double smape_variant(std::span<const double> forecasts, std::span<const double> actuals,
                     double eps = 0.1);

/// True for processes that can emit exact zeros, where the plain SMAPE
/// denominator is unsafe and the variant is used throughout.
bool use_variant_smape(DgpKind dgp);

/// Dispatches to smape or smape_variant based on the process family.
double score_smape(std::span<const double> forecasts, std::span<const double> actuals,
                   DgpKind dgp);

/// Mean absolute scaled error: mean |F-Y| over the horizon divided by the
/// in-sample mean absolute M-step naive error
///   1/(T-M) * sum_{k=M+1..T} |Y_k - Y_{k-M}|.
/// `insample` is the training region of the evaluated series.
double mase(std::span<const double> forecasts, std::span<const double> actuals,
            std::span<const double> insample, int seasonal_period);

/// Percentage difference of a model's error from the best model's error:
/// 100 * (E_m - E_b) / E_b.
double percentage_difference(double model_error, double best_error);

/// One scored (replicate, model, series) cell.
struct CellResult {
    std::string scenario;
    std::string dgp;
    int replicate = 0;
    std::string model;
    std::string series_id;
    int axis_value = 0; // sweep position (series length or series count)
    double smape = 0.0;
    double mase = 0.0;
};

/// Per-model aggregate over all evaluated (series, replicate) cells.
struct ModelSummary {
    std::string model;
    long cell_count = 0;
    double mean_smape = 0.0;
    double mean_mase = 0.0;
    double pct_diff_smape = 0.0; // vs the best mean SMAPE in the report
    double pct_diff_mase = 0.0;  // vs the best mean MASE in the report
};

struct ErrorReport {
    std::string scenario;
    std::string dgp;
    std::vector<ModelSummary> models; // sorted by model id
};

/// Unweighted means over all cells, computed in a canonical order so the
/// result is bit-identical under any input permutation. All rows must share
/// one (scenario, dgp) tag. Percentage differences are filled against the
/// best model per metric.
ErrorReport aggregate(std::vector<CellResult> rows);

/// Mean errors per (model, sweep axis value), canonically ordered — the
/// data-availability curves.
struct AvailabilityPoint {
    std::string model;
    int axis_value = 0;
    double mean_smape = 0.0;
    double mean_mase = 0.0;
};

std::vector<AvailabilityPoint> aggregate_by_axis(std::vector<CellResult> rows);

} // namespace simbench
