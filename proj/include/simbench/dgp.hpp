#pragma once

#include "simbench/rng.hpp"
#include "simbench/series.hpp"

#include <iosfwd>
#include <vector>

namespace simbench {

/// Burn-in defaults: linear recursions forget their zero initial state within
/// 100 steps; the logistic map reaches its attractor much faster.
inline constexpr int kArBurnIn = 100;
inline constexpr int kLogisticBurnIn = 40;

/// Expands prod_i (1 - z / roots[i]) and returns phi such that the product
/// equals 1 - phi[0] z - phi[1] z^2 - ... - phi[p-1] z^p. In other words,
/// the returned coefficients have characteristic-polynomial roots exactly
/// equal to `roots`.
std::vector<double> ar_coefficients_from_roots(const std::vector<double>& roots);

/// Samples a stationary AR(p) coefficient set by drawing p real
/// characteristic-polynomial roots uniformly from
/// [-root_max, -1.1] U [1.1, root_max] and expanding the polynomial.
/// Intercept 0, unit noise.
ArCoefficients sample_stationary_ar_coefficients(int p, double root_max, Rng& rng);

/// True when all characteristic-polynomial roots of 1 - sum phi_i z^i lie
/// strictly outside the unit circle (checked via companion-matrix
/// eigenvalues). Empty phi counts as stationary.
bool is_stationary_ar(const std::vector<double>& phi);

/// Simulates an AR(p) recursion. The state starts at `initial_state` (oldest
/// first, padded with zeros on the left when shorter than p; empty = all
/// zeros), `burn_in` values are generated and discarded, then `length`
/// values are recorded. Non-stationary coefficients are accepted but the
/// returned series carries a warning.
RawSeries simulate_ar(const ArCoefficients& coeffs, int length, int burn_in, Rng& rng,
                      const std::vector<double>& initial_state = {});

/// Simulates a purely seasonal AR: lags S, 2S, ..., PS.
RawSeries simulate_sar(const SarCoefficients& coeffs, int length, int burn_in, Rng& rng);

/// Simulates the noisy logistic map
///   y_t = max(r * y_{t-1} * (1 - y_{t-1}) + e_t / 10, 0),
/// starting from y0; the start value itself is not emitted.
RawSeries simulate_logistic_map(const LogisticMapParams& params, int length, int burn_in,
                                Rng& rng);

/// Simulates a threshold AR. The initial values are part of the process
/// definition (no burn-in); regime j is selected at each step by comparing
/// y_{t-delay} against the ordered thresholds (first regime when the value is
/// <= thresholds[0], last regime when it exceeds all thresholds).
RawSeries simulate_setar(const SetarParams& params, int length, Rng& rng);

/// Simulates the unit-step Mackey-Glass recursion. The history over the
/// delay window is the constant params.initial_level; when that field is NaN
/// it is resolved to 0.5 + N(0, 0.01) drawn from `rng` and recorded in the
/// returned series' parameters. Burn-in is max(tau, 100). Values whose
/// magnitude exceeds 1e6 abort with a numeric error naming the step.
RawSeries simulate_mackey_glass(const MackeyGlassParams& params, int length, Rng& rng);

/// Post-simulation normalization applied per series before any modelling.
enum class StandardizeMode {
    ZScoreThenShift, // zero mean / unit variance, then shift so min >= 1
    ShiftOnly,       // shift so min >= 1, no rescaling
    None,            // leave untouched (bounded processes)
};

/// The normalization used for each process family: linear DGPs are z-scored
/// and shifted, Mackey-Glass is only shifted, the logistic map is bounded in
/// [0, ~1] already and stays untouched.
StandardizeMode standardize_mode_for(DgpKind kind);

/// Applies the chosen mode in place. The shift proceeds in two recorded
/// steps: subtract the minimum when it is negative, then add 1 when the
/// minimum is still below 1; afterwards min(values) >= 1 for both shift
/// modes. A constant series cannot be z-scored and raises a data error.
void standardize_series(RawSeries& series, StandardizeMode mode);

/// Long-format CSV dump: header "series_id,t,value", one row per observation.
void write_series_csv(std::ostream& out, const std::vector<RawSeries>& series);

/// One JSON object per line: {"dgp","id","params","seed","values"}.
/// Byte-stable for a given seed scheme.
void write_series_ndjson(std::ostream& out, const std::vector<RawSeries>& series);

} // namespace simbench
