#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gevcast/bootstrap.hpp"
#include "gevcast/error.hpp"
#include "gevcast/parallel.hpp"
#include "gevcast/random.hpp"
#include "gevcast/simulate.hpp"

using namespace gevcast;

namespace {

std::vector<double> index_grid(int j) {
    std::vector<double> g(j);
    std::iota(g.begin(), g.end(), 1.0);
    return g;
}

Eigen::MatrixXd normal_curves(int b, int j, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd c(b, j);
    for (int r = 0; r < b; ++r)
        for (int k = 0; k < j; ++k) c(r, k) = rng.normal(0.1 * k, 1.0 + 0.05 * k);
    return c;
}

}  // namespace

TEST(EmpiricalQuantile, TypeSeven) {
    const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
    // Sorted: 1 1 2 3 4 5 6 9; h = (n - 1) p.
    EXPECT_DOUBLE_EQ(empirical_quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(v, 1.0), 9.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(v, 0.5), 3.5);
    EXPECT_DOUBLE_EQ(empirical_quantile(v, 0.9), 6.0 + 0.3 * 3.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({2.5}, 0.3), 2.5);
}

TEST(PointwiseInterval, IdenticalCurvesGiveZeroWidth) {
    Eigen::MatrixXd c(60, 5);
    for (int r = 0; r < 60; ++r) c.row(r) << 1, 2, 3, 4, 5;
    const auto g = index_grid(5);
    const IntervalBand pw = pointwise_interval(c, g, 0.95);
    const IntervalBand sb = simultaneous_band(c, g, 0.95);
    for (int k = 0; k < 5; ++k) {
        EXPECT_DOUBLE_EQ(pw.lower[k], k + 1.0);
        EXPECT_DOUBLE_EQ(pw.upper[k], k + 1.0);
        EXPECT_DOUBLE_EQ(sb.lower[k], k + 1.0);
        EXPECT_DOUBLE_EQ(sb.upper[k], k + 1.0);
    }
}

TEST(PointwiseInterval, MatchesNormalQuantilesForLargeB) {
    const int b = 20000, j = 4;
    const Eigen::MatrixXd c = normal_curves(b, j, 5);
    const IntervalBand pw = pointwise_interval(c, index_grid(j), 0.9);
    const double z = 1.6448536269514722;
    for (int k = 0; k < j; ++k) {
        const double sd = 1.0 + 0.05 * k;
        EXPECT_NEAR(pw.lower[k], 0.1 * k - z * sd, 0.05 * sd);
        EXPECT_NEAR(pw.upper[k], 0.1 * k + z * sd, 0.05 * sd);
    }
}

TEST(PointwiseInterval, LevelValidation) {
    const Eigen::MatrixXd c = normal_curves(60, 3, 1);
    const auto g = index_grid(3);
    EXPECT_THROW(pointwise_interval(c, g, 0.0), ArgumentError);
    EXPECT_THROW(pointwise_interval(c, g, 1.0), ArgumentError);
    EXPECT_THROW(simultaneous_band(c, g, 1.0), ArgumentError);
}

TEST(SimultaneousBand, ContainsPointwiseAndExactCount) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int b = 50 + 37 * static_cast<int>(seed);
        const Eigen::MatrixXd c = normal_curves(b, 12, seed);
        const auto g = index_grid(12);
        for (double level : {0.8, 0.9, 0.95}) {
            const IntervalBand pw = pointwise_interval(c, g, level);
            const IntervalBand sb = simultaneous_band(c, g, level);
            EXPECT_EQ(sb.kind, BandKind::simultaneous);
            for (int k = 0; k < 12; ++k) {
                EXPECT_LE(sb.lower[k], pw.lower[k] + 1e-12);
                EXPECT_GE(sb.upper[k], pw.upper[k] - 1e-12);
            }
            EXPECT_GE(curves_inside(c, sb), static_cast<int>(std::ceil(level * b)));
        }
    }
}

TEST(SieveBootstrap, DeterministicAndThreadIndependent) {
    DgpSpec spec;
    spec.setting = 2;
    spec.T = 20;
    spec.J = 20;
    spec.seed = 4;
    const SimTruth truth = generate(spec);
    set_max_threads(1);
    const BootstrapForecasts a = sieve_bootstrap_forecasts(truth.series, {3, 3, 0}, 0.99, 50, 11);
    set_max_threads(4);
    const BootstrapForecasts b = sieve_bootstrap_forecasts(truth.series, {3, 3, 0}, 0.99, 50, 11);
    set_max_threads(0);
    ASSERT_EQ(a.curves.rows(), 50);
    EXPECT_EQ(a.curves, b.curves);
    EXPECT_EQ(a.point, b.point);
    const BootstrapForecasts c = sieve_bootstrap_forecasts(truth.series, {3, 3, 0}, 0.99, 50, 12);
    EXPECT_NE(a.curves, c.curves);
    EXPECT_THROW(sieve_bootstrap_forecasts(truth.series, {3, 3, 0}, 0.99, 10, 11), ArgumentError);
}
