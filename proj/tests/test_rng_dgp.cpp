#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simbench/dgp.hpp"
#include "simbench/errors.hpp"
#include "simbench/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

using namespace simbench;

TEST_CASE("generator streams are reproducible and seed-sensitive") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform draws cover the requested ranges") {
    Rng rng(7);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t v = rng.uniform_int(-3, 4);
        CHECK(v >= -3);
        CHECK(v <= 4);
        saw_lo = saw_lo || v == -3;
        saw_hi = saw_hi || v == 4;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);

    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform(2.0, 5.0);
        CHECK(v >= 2.0);
        CHECK(v <= 5.0);
    }
    // Degenerate range collapses to the single admissible value.
    CHECK(rng.uniform_int(9, 9) == 9);
}

TEST_CASE("gaussian draws have the requested moments") {
    Rng rng(1234);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double variance = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(variance - 1.0) < 0.03);

    Rng rng2(1234);
    double shifted = rng2.normal(10.0, 2.0);
    CHECK(std::isfinite(shifted));
}

TEST_CASE("derived seeds separate purposes, replicates and series") {
    const std::uint64_t base = 12345;
    std::set<std::uint64_t> seen;
    for (std::uint64_t rep = 0; rep < 12; ++rep) {
        for (std::uint64_t series = 0; series < 12; ++series) {
            for (auto purpose : {SeedPurpose::CoefficientDraw, SeedPurpose::NoiseDraw,
                                 SeedPurpose::InitialState, SeedPurpose::ModelInit,
                                 SeedPurpose::Shuffle, SeedPurpose::TuningDraw,
                                 SeedPurpose::InputNoise}) {
                seen.insert(derive_seed(base, rep, series, purpose));
            }
        }
    }
    CHECK(seen.size() == 12u * 12u * 7u);
    // Deterministic: recomputing yields the same value.
    CHECK(derive_seed(base, 3, 5, SeedPurpose::NoiseDraw) ==
          derive_seed(base, 3, 5, SeedPurpose::NoiseDraw));
    // A different base seed moves every stream.
    CHECK(derive_seed(base, 0, 0, SeedPurpose::NoiseDraw) !=
          derive_seed(base + 1, 0, 0, SeedPurpose::NoiseDraw));
}

TEST_CASE("characteristic roots convert to autoregressive coefficients") {
    const auto one_root = ar_coefficients_from_roots({2.0});
    REQUIRE(one_root.size() == 1);
    CHECK(one_root[0] == doctest::Approx(0.5).epsilon(1e-14));

    // (1 - z/2)(1 + z/2) = 1 - z^2/4.
    const auto paired = ar_coefficients_from_roots({2.0, -2.0});
    REQUIRE(paired.size() == 2);
    CHECK(paired[0] == doctest::Approx(0.0));
    CHECK(paired[1] == doctest::Approx(0.25).epsilon(1e-14));

    // (1 - z/4)(1 - z/5) = 1 - 0.45 z + 0.05 z^2.
    const auto two = ar_coefficients_from_roots({4.0, 5.0});
    CHECK(two[0] == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(two[1] == doctest::Approx(-0.05).epsilon(1e-14));

    CHECK_THROWS_AS(ar_coefficients_from_roots({0.0}), ParameterError);
}

TEST_CASE("stationarity check matches the classic coefficient regions") {
    CHECK(is_stationary_ar({0.5}));
    CHECK(is_stationary_ar({-0.95}));
    CHECK_FALSE(is_stationary_ar({1.0}));
    CHECK_FALSE(is_stationary_ar({1.2}));
    // AR(2) triangle: phi2 + phi1 < 1, phi2 - phi1 < 1, |phi2| < 1.
    CHECK(is_stationary_ar({0.5, 0.4}));
    CHECK_FALSE(is_stationary_ar({0.5, 0.6}));
    // Trailing zeros do not change the answer.
    CHECK(is_stationary_ar({0.5, 0.0, 0.0}));
    CHECK(is_stationary_ar({}));
}

namespace {

double companion_spectral_radius(const std::vector<double>& phi) {
    const auto p = static_cast<Eigen::Index>(phi.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = phi[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    double radius = 0.0;
    const auto eigenvalues = companion.eigenvalues();
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        radius = std::max(radius, std::abs(eigenvalues[i]));
    }
    return radius;
}

} // namespace

TEST_CASE("sampled coefficient sets are always safely stationary") {
    Rng rng(2026);
    for (int draw = 0; draw < 200; ++draw) {
        const ArCoefficients coeffs = sample_stationary_ar_coefficients(3, 5.0, rng);
        REQUIRE(coeffs.phi.size() == 3);
        CHECK(is_stationary_ar(coeffs.phi));
        // Roots are kept at modulus >= 1.1, i.e. companion eigenvalues
        // at most 1/1.1.
        CHECK(companion_spectral_radius(coeffs.phi) <= 1.0 / 1.1 + 1e-9);
    }
    CHECK_THROWS_AS(sample_stationary_ar_coefficients(0, 5.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_stationary_ar_coefficients(3, 1.05, rng), ParameterError);
}

TEST_CASE("linear simulation is deterministic and respects its knobs") {
    ArCoefficients coeffs;
    coeffs.intercept = 1.0;
    coeffs.phi = {0.5};
    coeffs.noise_std = 1.0;

    Rng a(5), b(5);
    const RawSeries sa = simulate_ar(coeffs, 50, 100, a);
    const RawSeries sb = simulate_ar(coeffs, 50, 100, b);
    REQUIRE(sa.values.size() == 50);
    CHECK(sa.values == sb.values);
    CHECK(sa.dgp == DgpKind::Ar);
    CHECK(sa.warnings.empty());

    // Burn-in discards the transient: with none, the first value reflects the
    // zero initial history directly.
    Rng c(5);
    const RawSeries no_burn = simulate_ar(coeffs, 50, 0, c);
    CHECK(no_burn.values.front() != sa.values.front());

    CHECK_THROWS_AS(simulate_ar(coeffs, 0, 10, a), ParameterError);
    CHECK_THROWS_AS(simulate_ar(coeffs, 10, -1, a), ParameterError);
    const std::vector<double> too_long{1.0, 2.0};
    CHECK_THROWS_AS(simulate_ar(coeffs, 10, 0, a, too_long), ParameterError);
}

TEST_CASE("noise-free linear recursion reproduces its closed form") {
    ArCoefficients coeffs;
    coeffs.intercept = 5.0;
    coeffs.phi = {};
    coeffs.noise_std = 0.0;
    Rng rng(1);
    const RawSeries series = simulate_ar(coeffs, 20, 0, rng);
    for (double v : series.values) CHECK(v == 5.0);

    ArCoefficients halving;
    halving.intercept = 0.0;
    halving.phi = {0.5};
    halving.noise_std = 0.0;
    Rng rng2(1);
    const RawSeries decay = simulate_ar(halving, 4, 0, rng2, {8.0});
    REQUIRE(decay.values.size() == 4);
    CHECK(decay.values[0] == 4.0);
    CHECK(decay.values[1] == 2.0);
    CHECK(decay.values[2] == 1.0);
    CHECK(decay.values[3] == 0.5);
}

TEST_CASE("non-stationary coefficients are flagged, not rejected") {
    ArCoefficients coeffs;
    coeffs.phi = {1.01};
    coeffs.noise_std = 0.0;
    Rng rng(3);
    const RawSeries series = simulate_ar(coeffs, 10, 0, rng, {1.0});
    REQUIRE_FALSE(series.warnings.empty());
}

TEST_CASE("seasonal simulation equals the expanded-lag linear recursion") {
    SarCoefficients sar;
    sar.intercept = 2.0;
    sar.seasonal_phi = {0.85};
    sar.period = 12;
    sar.noise_std = 1.0;

    ArCoefficients expanded;
    expanded.intercept = 2.0;
    expanded.noise_std = 1.0;
    expanded.phi.assign(12, 0.0);
    expanded.phi[11] = 0.85;

    Rng a(21), b(21);
    const RawSeries seasonal = simulate_sar(sar, 60, 100, a);
    const RawSeries linear = simulate_ar(expanded, 60, 100, b);
    CHECK(seasonal.values == linear.values);
    CHECK(seasonal.dgp == DgpKind::Sar);
}

TEST_CASE("chaotic map stays non-negative and reproducible") {
    LogisticMapParams params; // r = 3.6, y0 = 0.5
    Rng a(31), b(31);
    const RawSeries sa = simulate_logistic_map(params, 20000, 40, a);
    const RawSeries sb = simulate_logistic_map(params, 20000, 40, b);
    CHECK(sa.values == sb.values);
    for (double v : sa.values) CHECK(v >= 0.0);
    // The chaotic band keeps the series moving.
    double min = sa.values[0], max = sa.values[0];
    for (double v : sa.values) {
        min = std::min(min, v);
        max = std::max(max, v);
    }
    CHECK(max - min > 0.1);
}

TEST_CASE("threshold recursion with one regime matches the linear path bitwise") {
    ArCoefficients regime;
    regime.intercept = 0.3;
    regime.phi = {0.4, -0.2};
    regime.noise_std = 1.0;

    SetarParams params;
    params.regimes = {regime};
    params.thresholds = {};
    params.delay = 1;
    params.initial_values = {0.7, -0.1};

    Rng a(77), b(77);
    const RawSeries switching = simulate_setar(params, 200, a);
    const RawSeries linear = simulate_ar(regime, 200, 0, b, params.initial_values);
    REQUIRE(switching.values.size() == linear.values.size());
    for (std::size_t i = 0; i < switching.values.size(); ++i) {
        CHECK(switching.values[i] == linear.values[i]); // bitwise
    }
}

TEST_CASE("threshold recursion routes regimes by the delayed value") {
    // Regime below zero emits +1, regime above emits -1, no noise: the
    // series must alternate deterministically.
    SetarParams params;
    params.regimes = {ArCoefficients{1.0, {}, 0.0}, ArCoefficients{-1.0, {}, 0.0}};
    params.thresholds = {0.0};
    params.delay = 1;
    params.initial_values = {-1.0};
    Rng rng(9);
    const RawSeries series = simulate_setar(params, 6, rng);
    const std::vector<double> expected{1.0, -1.0, 1.0, -1.0, 1.0, -1.0};
    CHECK(series.values == expected);
}

TEST_CASE("threshold recursion validates its parameters") {
    ArCoefficients regime;
    regime.phi = {0.5};
    SetarParams params;
    params.regimes = {regime, regime};
    params.thresholds = {2.0};
    params.delay = 1;
    params.initial_values = {};
    Rng rng(1);
    CHECK_THROWS_AS(simulate_setar(params, 10, rng), ParameterError); // missing history
    params.initial_values = {1.0};
    params.thresholds = {};
    CHECK_THROWS_AS(simulate_setar(params, 10, rng), ParameterError); // threshold count
    params.thresholds = {2.0};
    params.delay = 0;
    CHECK_THROWS_AS(simulate_setar(params, 10, rng), ParameterError); // delay
}

TEST_CASE("delay recursion holds its constant fixed point exactly") {
    MackeyGlassParams params; // beta 0.2, gamma 0.1, exponent 10
    params.initial_level = 1.0;
    Rng rng(55);
    const RawSeries series = simulate_mackey_glass(params, 500, rng);
    for (double v : series.values) CHECK(v == 1.0); // bitwise fixed point
}

TEST_CASE("delay recursion produces bounded chaotic trajectories") {
    MackeyGlassParams params;
    params.initial_level = 0.5;
    Rng a(8), b(8);
    const RawSeries sa = simulate_mackey_glass(params, 2000, a);
    const RawSeries sb = simulate_mackey_glass(params, 2000, b);
    CHECK(sa.values == sb.values);
    double min = sa.values[0], max = sa.values[0];
    for (double v : sa.values) {
        min = std::min(min, v);
        max = std::max(max, v);
    }
    CHECK(min > 0.0);
    CHECK(max < 2.0);
    CHECK(max - min > 0.2);

    MackeyGlassParams bad = params;
    bad.tau = 0;
    CHECK_THROWS_AS(simulate_mackey_glass(bad, 10, a), ParameterError);
}

TEST_CASE("jittered initial level is drawn when left unspecified") {
    MackeyGlassParams params;
    params.initial_level = std::numeric_limits<double>::quiet_NaN();
    Rng a(101), b(101), c(102);
    const RawSeries sa = simulate_mackey_glass(params, 100, a);
    const RawSeries sb = simulate_mackey_glass(params, 100, b);
    const RawSeries sc = simulate_mackey_glass(params, 100, c);
    CHECK(sa.values == sb.values);
    CHECK(sa.values != sc.values);
}

TEST_CASE("standardization modes match each process family") {
    CHECK(standardize_mode_for(DgpKind::Ar) == StandardizeMode::ZScoreThenShift);
    CHECK(standardize_mode_for(DgpKind::Sar) == StandardizeMode::ZScoreThenShift);
    CHECK(standardize_mode_for(DgpKind::Setar) == StandardizeMode::ZScoreThenShift);
    CHECK(standardize_mode_for(DgpKind::MackeyGlass) == StandardizeMode::ShiftOnly);
    CHECK(standardize_mode_for(DgpKind::LogisticMap) == StandardizeMode::None);
}

TEST_CASE("z-score standardization yields unit spread shifted above one") {
    RawSeries series;
    series.id = "s0000";
    Rng rng(61);
    for (int i = 0; i < 500; ++i) series.values.push_back(rng.normal(40.0, 7.0));
    standardize_series(series, StandardizeMode::ZScoreThenShift);

    double mean = 0.0;
    for (double v : series.values) mean += v;
    mean /= static_cast<double>(series.values.size());
    double ss = 0.0;
    for (double v : series.values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(series.values.size() - 1));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*std::min_element(series.values.begin(), series.values.end()) >= 1.0);

    RawSeries constant;
    constant.values = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(standardize_series(constant, StandardizeMode::ZScoreThenShift), DataError);
}

TEST_CASE("shift-only standardization preserves differences") {
    RawSeries series;
    series.values = {-3.0, 0.0, 4.0};
    const std::vector<double> original = series.values;
    standardize_series(series, StandardizeMode::ShiftOnly);
    CHECK(*std::min_element(series.values.begin(), series.values.end()) >= 1.0);
    for (std::size_t i = 1; i < series.values.size(); ++i) {
        CHECK(series.values[i] - series.values[i - 1] ==
              doctest::Approx(original[i] - original[i - 1]).epsilon(1e-14));
    }

    RawSeries untouched;
    untouched.values = {0.2, 0.8};
    standardize_series(untouched, StandardizeMode::None);
    CHECK((untouched.values == std::vector<double>{0.2, 0.8}));
}
