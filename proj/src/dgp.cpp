#include "simbench/dgp.hpp"

#include "simbench/errors.hpp"
#include "simbench/textio.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace simbench {

namespace {

/// One linear-recursion step shared by the AR and SETAR simulators so that a
/// single-regime SETAR is bit-identical to the plain AR path.
double ar_step(const ArCoefficients& c, const std::vector<double>& history, double noise) {
    double acc = c.intercept;
    const std::size_t n = history.size();
    for (std::size_t i = 0; i < c.phi.size(); ++i) {
        acc += c.phi[i] * history[n - 1 - i];
    }
    return acc + c.noise_std * noise;
}

void check_finite(double value, int step, const char* what) {
    if (!std::isfinite(value)) {
        throw NumericError(std::string(what) + " diverged to a non-finite value at step " +
                           std::to_string(step));
    }
}

nlohmann::json params_to_json(const DgpParams& params) {
    nlohmann::json j;
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArCoefficients>) {
                j = {{"intercept", p.intercept}, {"phi", p.phi}, {"noise_std", p.noise_std}};
            } else if constexpr (std::is_same_v<T, SarCoefficients>) {
                j = {{"intercept", p.intercept},
                     {"seasonal_phi", p.seasonal_phi},
                     {"period", p.period},
                     {"noise_std", p.noise_std}};
            } else if constexpr (std::is_same_v<T, LogisticMapParams>) {
                j = {{"r", p.r}, {"y0", p.y0}, {"noise_std", p.noise_std}};
            } else if constexpr (std::is_same_v<T, SetarParams>) {
                nlohmann::json regimes = nlohmann::json::array();
                for (const auto& r : p.regimes) {
                    regimes.push_back({{"intercept", r.intercept},
                                       {"phi", r.phi},
                                       {"noise_std", r.noise_std}});
                }
                j = {{"regimes", regimes},
                     {"thresholds", p.thresholds},
                     {"delay", p.delay},
                     {"initial_values", p.initial_values}};
            } else if constexpr (std::is_same_v<T, MackeyGlassParams>) {
                j = {{"beta", p.beta},
                     {"gamma", p.gamma},
                     {"exponent", p.exponent},
                     {"tau", p.tau},
                     {"initial_level", p.initial_level}};
            }
        },
        params);
    return j;
}

} // namespace

std::vector<double> ar_coefficients_from_roots(const std::vector<double>& roots) {
    // poly holds the coefficients of prod (1 - z/r_i) in ascending powers.
    std::vector<double> poly{1.0};
    for (double root : roots) {
        if (root == 0.0) throw ParameterError("characteristic root must be nonzero");
        poly.push_back(0.0);
        for (std::size_t k = poly.size() - 1; k >= 1; --k) {
            poly[k] -= poly[k - 1] / root;
        }
    }
    // 1 - phi_1 z - ... - phi_p z^p  =>  phi_k = -poly[k].
    std::vector<double> phi(poly.size() - 1);
    for (std::size_t k = 1; k < poly.size(); ++k) phi[k - 1] = -poly[k];
    return phi;
}

ArCoefficients sample_stationary_ar_coefficients(int p, double root_max, Rng& rng) {
    if (p < 1) throw ParameterError("AR order must be >= 1");
    if (root_max <= 1.1) throw ParameterError("root_max must exceed 1.1");
    std::vector<double> roots(static_cast<std::size_t>(p));
    for (double& root : roots) {
        const double magnitude = rng.uniform(1.1, root_max);
        const bool negative = rng.uniform01() < 0.5;
        root = negative ? -magnitude : magnitude;
    }
    ArCoefficients coeffs;
    coeffs.phi = ar_coefficients_from_roots(roots);
    return coeffs;
}

bool is_stationary_ar(const std::vector<double>& phi) {
    // Drop trailing zero coefficients; they add roots at infinity.
    std::size_t p = phi.size();
    while (p > 0 && phi[p - 1] == 0.0) --p;
    if (p == 0) return true;
    // Companion matrix of y_t = phi_1 y_{t-1} + ... ; eigenvalues are the
    // reciprocals of the characteristic-polynomial roots, so stationarity is
    // max |eigenvalue| < 1.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                      static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i) companion(0, static_cast<Eigen::Index>(i)) = phi[i];
    for (std::size_t i = 1; i < p; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
    const auto eigenvalues = companion.eigenvalues();
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (std::abs(eigenvalues[i]) >= 1.0) return false;
    }
    return true;
}

RawSeries simulate_ar(const ArCoefficients& coeffs, int length, int burn_in, Rng& rng,
                      const std::vector<double>& initial_state) {
    if (length < 1) throw ParameterError("series length must be >= 1");
    if (burn_in < 0) throw ParameterError("burn-in must be >= 0");
    const std::size_t p = coeffs.phi.size();
    if (initial_state.size() > p) {
        throw ParameterError("initial state longer than the AR order");
    }

    RawSeries series;
    series.dgp = DgpKind::Ar;
    series.params = coeffs;
    if (!is_stationary_ar(coeffs.phi)) {
        series.warnings.push_back("non-stationary AR coefficients; simulation may diverge");
    }

    std::vector<double> history(p, 0.0);
    std::copy(initial_state.begin(), initial_state.end(),
              history.end() - static_cast<std::ptrdiff_t>(initial_state.size()));
    series.values.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < burn_in + length; ++t) {
        const double y = ar_step(coeffs, history, rng.normal());
        check_finite(y, t, "AR simulation");
        if (!history.empty()) {
            history.erase(history.begin());
            history.push_back(y);
        }
        if (t >= burn_in) series.values.push_back(y);
    }
    return series;
}

RawSeries simulate_sar(const SarCoefficients& coeffs, int length, int burn_in, Rng& rng) {
    if (length < 1) throw ParameterError("series length must be >= 1");
    if (burn_in < 0) throw ParameterError("burn-in must be >= 0");
    if (coeffs.period < 1) throw ParameterError("seasonal period must be >= 1");

    // A purely seasonal AR(P, S) is an AR(P*S) whose only nonzero
    // coefficients sit at the seasonal lags.
    ArCoefficients expanded;
    expanded.intercept = coeffs.intercept;
    expanded.noise_std = coeffs.noise_std;
    expanded.phi.assign(coeffs.seasonal_phi.size() * static_cast<std::size_t>(coeffs.period),
                        0.0);
    for (std::size_t k = 0; k < coeffs.seasonal_phi.size(); ++k) {
        expanded.phi[(k + 1) * static_cast<std::size_t>(coeffs.period) - 1] =
            coeffs.seasonal_phi[k];
    }

    RawSeries series = simulate_ar(expanded, length, burn_in, rng);
    series.dgp = DgpKind::Sar;
    series.params = coeffs;
    return series;
}

RawSeries simulate_logistic_map(const LogisticMapParams& params, int length, int burn_in,
                                Rng& rng) {
    if (length < 1) throw ParameterError("series length must be >= 1");
    if (burn_in < 0) throw ParameterError("burn-in must be >= 0");

    RawSeries series;
    series.dgp = DgpKind::LogisticMap;
    series.params = params;
    series.values.reserve(static_cast<std::size_t>(length));
    double y = params.y0;
    for (int t = 0; t < burn_in + length; ++t) {
        y = std::max(params.r * y * (1.0 - y) + params.noise_std * rng.normal() / 10.0, 0.0);
        check_finite(y, t, "logistic map simulation");
        if (t >= burn_in) series.values.push_back(y);
    }
    return series;
}

RawSeries simulate_setar(const SetarParams& params, int length, Rng& rng) {
    if (length < 1) throw ParameterError("series length must be >= 1");
    if (params.regimes.empty()) throw ParameterError("SETAR needs at least one regime");
    if (params.thresholds.size() + 1 != params.regimes.size()) {
        throw ParameterError("SETAR needs exactly one threshold between adjacent regimes");
    }
    if (!std::is_sorted(params.thresholds.begin(), params.thresholds.end())) {
        throw ParameterError("SETAR thresholds must be ascending");
    }
    if (params.delay < 1) throw ParameterError("SETAR delay must be >= 1");
    std::size_t max_order = static_cast<std::size_t>(params.delay);
    for (const auto& regime : params.regimes) max_order = std::max(max_order, regime.phi.size());
    if (params.initial_values.size() < max_order) {
        throw ParameterError("SETAR initial values must cover the largest lag");
    }

    RawSeries series;
    series.dgp = DgpKind::Setar;
    series.params = params;
    for (const auto& regime : params.regimes) {
        if (!is_stationary_ar(regime.phi)) {
            series.warnings.push_back("non-stationary SETAR regime; simulation may diverge");
            break;
        }
    }

    std::vector<double> history = params.initial_values;
    series.values.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
        const double delayed = history[history.size() - static_cast<std::size_t>(params.delay)];
        std::size_t regime = params.thresholds.size();
        for (std::size_t j = 0; j < params.thresholds.size(); ++j) {
            if (delayed <= params.thresholds[j]) {
                regime = j;
                break;
            }
        }
        const double y = ar_step(params.regimes[regime], history, rng.normal());
        check_finite(y, t, "SETAR simulation");
        history.erase(history.begin());
        history.push_back(y);
        series.values.push_back(y);
    }
    return series;
}

RawSeries simulate_mackey_glass(const MackeyGlassParams& params, int length, Rng& rng) {
    if (length < 1) throw ParameterError("series length must be >= 1");
    if (params.tau < 1) throw ParameterError("Mackey-Glass delay must be >= 1");

    MackeyGlassParams resolved = params;
    if (std::isnan(resolved.initial_level)) {
        resolved.initial_level = 0.5 + rng.normal(0.0, 0.01);
    }

    RawSeries series;
    series.dgp = DgpKind::MackeyGlass;
    series.params = resolved;

    const int burn_in = std::max(resolved.tau, 100);
    const std::size_t delay = static_cast<std::size_t>(resolved.tau);
    std::vector<double> history(delay + 1, resolved.initial_level);
    series.values.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < burn_in + length; ++t) {
        const double current = history.back();
        const double delayed = history[history.size() - 1 - delay];
        const double y = current +
                         resolved.beta * delayed / (1.0 + std::pow(delayed, resolved.exponent)) -
                         resolved.gamma * current;
        if (!std::isfinite(y) || std::abs(y) > 1e6) {
            throw NumericError("Mackey-Glass simulation diverged at step " + std::to_string(t));
        }
        history.erase(history.begin());
        history.push_back(y);
        if (t >= burn_in) series.values.push_back(y);
    }
    return series;
}

StandardizeMode standardize_mode_for(DgpKind kind) {
    switch (kind) {
        case DgpKind::Ar:
        case DgpKind::Sar:
        case DgpKind::Setar: return StandardizeMode::ZScoreThenShift;
        case DgpKind::MackeyGlass: return StandardizeMode::ShiftOnly;
        case DgpKind::LogisticMap: return StandardizeMode::None;
    }
    throw InternalError("standardize_mode_for: unknown kind");
}

void standardize_series(RawSeries& series, StandardizeMode mode) {
    if (mode == StandardizeMode::None) return;
    auto& v = series.values;
    if (v.empty()) throw DataError("cannot standardize an empty series");

    if (mode == StandardizeMode::ZScoreThenShift) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        if (v.size() < 2 || ss <= 0.0) {
            throw DataError("cannot z-score a constant series (id " + series.id + ")");
        }
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        for (double& x : v) x = (x - mean) / sd;
    }

    double min = *std::min_element(v.begin(), v.end());
    if (min < 0.0) {
        for (double& x : v) x -= min;
        min = *std::min_element(v.begin(), v.end());
    }
    if (min < 1.0) {
        for (double& x : v) x += 1.0;
    }
}

void write_series_csv(std::ostream& out, const std::vector<RawSeries>& series) {
    out << "series_id,t,value\n";
    for (const auto& s : series) {
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            out << s.id << ',' << t << ',' << format_double(s.values[t]) << '\n';
        }
    }
}

void write_series_ndjson(std::ostream& out, const std::vector<RawSeries>& series) {
    for (const auto& s : series) {
        nlohmann::json line = {{"id", s.id},
                               {"dgp", to_string(s.dgp)},
                               {"seed", s.seed},
                               {"params", params_to_json(s.params)},
                               {"values", s.values}};
        out << line.dump() << '\n';
    }
}

} // namespace simbench
