#include "simbench/metrics.hpp"

#include "simbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace simbench {

namespace {

void check_pair(std::span<const double> forecasts, std::span<const double> actuals) {
    if (forecasts.size() != actuals.size()) {
        throw MetricError("forecast/actual length mismatch: " +
                          std::to_string(forecasts.size()) + " vs " +
                          std::to_string(actuals.size()));
    }
    if (forecasts.empty()) {
        throw MetricError("empty forecast horizon");
    }
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        if (!std::isfinite(forecasts[i]) || !std::isfinite(actuals[i])) {
            throw MetricError("non-finite value at horizon step " + std::to_string(i));
        }
    }
}

} // namespace

double smape(std::span<const double> forecasts, std::span<const double> actuals) {
    check_pair(forecasts, actuals);
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double denom = (std::abs(actuals[i]) + std::abs(forecasts[i])) / 2.0;
        if (denom == 0.0) {
            throw MetricError("SMAPE denominator is zero at step " + std::to_string(i) +
                              "; use the zero-safe variant for data that can reach zero");
        }
        total += std::abs(forecasts[i] - actuals[i]) / denom;
    }
    return 100.0 * total / static_cast<double>(forecasts.size());
}

double smape_variant(std::span<const double> forecasts, std::span<const double> actuals,
                     double eps) {
    check_pair(forecasts, actuals);
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double denom =
            std::max(std::abs(actuals[i]) + std::abs(forecasts[i]) + eps, 0.5 + eps);
        total += std::abs(forecasts[i] - actuals[i]) / denom;
    }
    return 100.0 * total / static_cast<double>(forecasts.size());
}

bool use_variant_smape(DgpKind dgp) { return dgp == DgpKind::LogisticMap; }

double score_smape(std::span<const double> forecasts, std::span<const double> actuals,
                   DgpKind dgp) {
    return use_variant_smape(dgp) ? smape_variant(forecasts, actuals)
                                  : smape(forecasts, actuals);
}

double mase(std::span<const double> forecasts, std::span<const double> actuals,
            std::span<const double> insample, int seasonal_period) {
    check_pair(forecasts, actuals);
    if (seasonal_period < 1) {
        throw MetricError("seasonal period must be >= 1");
    }
    const std::size_t m = static_cast<std::size_t>(seasonal_period);
    if (insample.size() <= m) {
        throw MetricError("in-sample series too short for the naive scale (length " +
                          std::to_string(insample.size()) + ", period " +
                          std::to_string(seasonal_period) + ")");
    }
    double scale = 0.0;
    for (std::size_t k = m; k < insample.size(); ++k) {
        scale += std::abs(insample[k] - insample[k - m]);
    }
    scale /= static_cast<double>(insample.size() - m);
    if (scale == 0.0) {
        throw MetricError("in-sample naive error is zero; MASE undefined");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        total += std::abs(forecasts[i] - actuals[i]);
    }
    return (total / static_cast<double>(forecasts.size())) / scale;
}

double percentage_difference(double model_error, double best_error) {
    if (best_error == 0.0) {
        throw MetricError("percentage difference undefined for a zero baseline error");
    }
    return 100.0 * (model_error - best_error) / best_error;
}

namespace {

bool cell_order(const CellResult& a, const CellResult& b) {
    if (a.model != b.model) return a.model < b.model;
    if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
    if (a.replicate != b.replicate) return a.replicate < b.replicate;
    return a.series_id < b.series_id;
}

} // namespace

ErrorReport aggregate(std::vector<CellResult> rows) {
    if (rows.empty()) {
        throw MetricError("no result cells to aggregate");
    }
    std::sort(rows.begin(), rows.end(), cell_order);
    ErrorReport report;
    report.scenario = rows.front().scenario;
    report.dgp = rows.front().dgp;
    for (const CellResult& row : rows) {
        if (row.scenario != report.scenario || row.dgp != report.dgp) {
            throw MetricError("cannot aggregate cells from different experiments (" +
                              row.scenario + "/" + row.dgp + " vs " + report.scenario +
                              "/" + report.dgp + ")");
        }
    }
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        double smape_sum = 0.0;
        double mase_sum = 0.0;
        while (j < rows.size() && rows[j].model == rows[i].model) {
            smape_sum += rows[j].smape;
            mase_sum += rows[j].mase;
            ++j;
        }
        ModelSummary summary;
        summary.model = rows[i].model;
        summary.cell_count = static_cast<long>(j - i);
        summary.mean_smape = smape_sum / static_cast<double>(j - i);
        summary.mean_mase = mase_sum / static_cast<double>(j - i);
        report.models.push_back(summary);
        i = j;
    }
    double best_smape = report.models.front().mean_smape;
    double best_mase = report.models.front().mean_mase;
    for (const ModelSummary& m : report.models) {
        best_smape = std::min(best_smape, m.mean_smape);
        best_mase = std::min(best_mase, m.mean_mase);
    }
    for (ModelSummary& m : report.models) {
        m.pct_diff_smape = percentage_difference(m.mean_smape, best_smape);
        m.pct_diff_mase = percentage_difference(m.mean_mase, best_mase);
    }
    return report;
}

std::vector<AvailabilityPoint> aggregate_by_axis(std::vector<CellResult> rows) {
    if (rows.empty()) {
        throw MetricError("no result cells to aggregate");
    }
    std::sort(rows.begin(), rows.end(), cell_order);
    std::vector<AvailabilityPoint> points;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        double smape_sum = 0.0;
        double mase_sum = 0.0;
        while (j < rows.size() && rows[j].model == rows[i].model &&
               rows[j].axis_value == rows[i].axis_value) {
            smape_sum += rows[j].smape;
            mase_sum += rows[j].mase;
            ++j;
        }
        AvailabilityPoint point;
        point.model = rows[i].model;
        point.axis_value = rows[i].axis_value;
        point.mean_smape = smape_sum / static_cast<double>(j - i);
        point.mean_mase = mase_sum / static_cast<double>(j - i);
        points.push_back(point);
        i = j;
    }
    return points;
}

} // namespace simbench
