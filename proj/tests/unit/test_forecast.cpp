#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gevcast/error.hpp"
#include "gevcast/forecast.hpp"
#include "gevcast/random.hpp"
#include "gevcast/simulate.hpp"

using namespace gevcast;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

FunctionalSeries iid_series(const GevParams& p, int t, int j, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd v(t, j);
    for (int r = 0; r < t; ++r)
        for (int c = 0; c < j; ++c) v(r, c) = quantile(p, rng.uniform_open());
    std::vector<int> years(t);
    for (int r = 0; r < t; ++r) years[r] = 2000 + r;
    return FunctionalSeries::from_values(years, linspace(0, 1, j), v);
}

}  // namespace

TEST(BoxCox, Values) {
    EXPECT_DOUBLE_EQ(boxcox(1.0, 0.7), 0.0);
    EXPECT_DOUBLE_EQ(boxcox(1.0, 0.0), 0.0);
    EXPECT_NEAR(boxcox(std::exp(1.0), 0.0), 1.0, 1e-15);
    EXPECT_NEAR(boxcox(4.0, 0.5), 2.0, 1e-14);
    for (double lambda : {-0.5, 0.0, 0.3, 1.0})
        for (double y : {0.01, 0.7, 3.0, 50.0}) EXPECT_NEAR(inv_boxcox(boxcox(y, lambda), lambda), y, 1e-12 * y);
    EXPECT_THROW(boxcox(0.0, 0.5), DomainError);
    EXPECT_THROW(boxcox(-1.0, 0.0), DomainError);
}

TEST(Fgev, IidCurvesForecastPooledParameters) {
    const GevParams truth(0, 1, 0.1);
    const FunctionalSeries s = iid_series(truth, 30, 200, 17);
    const ForecastDensity fd = forecast_fgev(s, 1);
    ASSERT_EQ(fd.params.size(), 200u);
    // Oracle: pooled MLE over all curves.
    std::vector<double> pooled(s.values.data(), s.values.data() + s.values.size());
    const GevFitResult p = fit_mle(pooled);
    EXPECT_NEAR(fd.params[0].mu(), p.params.mu(), 0.05);
    EXPECT_NEAR(fd.params[0].sigma(), p.params.sigma(), 0.05);
    EXPECT_NEAR(fd.params[0].xi(), p.params.xi(), 0.05);
    for (const auto& q : fd.params) EXPECT_EQ(q, fd.params[0]);
}

TEST(Fgev, ConstantParameterPathsGiveEqualHorizons) {
    const FunctionalSeries base = iid_series(GevParams(2, 0.5, 0.1), 1, 100, 3);
    Eigen::MatrixXd v(20, 100);
    for (int t = 0; t < 20; ++t) v.row(t) = base.values.row(0);
    std::vector<int> years(20);
    for (int t = 0; t < 20; ++t) years[t] = t;
    const FunctionalSeries s = FunctionalSeries::from_values(years, base.grid, v);
    const ForecastDensity h1 = forecast_fgev(s, 1), h2 = forecast_fgev(s, 2);
    EXPECT_NEAR(h1.params[0].mu(), h2.params[0].mu(), 1e-9);
    EXPECT_NEAR(h1.params[0].sigma(), h2.params[0].sigma(), 1e-9);
    EXPECT_NEAR(h1.params[0].xi(), h2.params[0].xi(), 1e-9);
}

TEST(Fgev, DegenerateYears) {
    FunctionalSeries s = iid_series(GevParams(0, 1, 0.1), 20, 50, 4);
    s.values.row(5).setConstant(1.0);  // one degenerate year: carried forward
    const auto fits = fit_years_gev(s);
    EXPECT_FALSE(fits[5].has_value());
    const FgevForecast f = fgev_from_fits(fits, s.grid, 1);
    ASSERT_EQ(f.imputed_years.size(), 1u);
    EXPECT_EQ(f.imputed_years[0], 5u);
    EXPECT_EQ(f.theta.row(5), f.theta.row(4));
    for (int t : {1, 2, 3, 7, 9}) s.values.row(t).setConstant(2.0);  // 6 of 20 > 20%
    EXPECT_THROW(forecast_fgev(s, 1), DegenerateDataError);
}

TEST(Fgaevm, ZeroNoiseCoefficientsForecastLastCurve) {
    // Identical curves give identical yearly fits; the forecast reproduces them.
    const auto grid = linspace(0, 1, 60);
    Rng rng(2);
    Eigen::MatrixXd v(15, 60);
    for (int j = 0; j < 60; ++j) v(0, j) = quantile(GevParams(std::sin(6 * grid[j]), 1, 0.1), rng.uniform_open());
    for (int t = 1; t < 15; ++t) v.row(t) = v.row(0);
    std::vector<int> years(15);
    for (int t = 0; t < 15; ++t) years[t] = t;
    const FunctionalSeries s = FunctionalSeries::from_values(years, grid, v);
    const GaevDesign design(grid, {5, 3, 0});
    const auto fits = fit_years_gaev(s, design);
    const FgaevmForecast f = fgaevm_from_fits(fits, design, 1);
    const auto last = fits.back().params_at(grid);
    for (int j = 0; j < 60; ++j) {
        EXPECT_NEAR(f.density.params[j].mu(), last[j].mu(), 1e-6);
        EXPECT_NEAR(f.density.params[j].sigma(), last[j].sigma(), 1e-6);
    }
}

TEST(Tsgaevm, ExtrapolationIsLinearAndConstantCurveStaysFlat) {
    const auto grid = linspace(0, 1, 60);
    Rng rng(6);
    std::vector<double> y;
    for (double t : grid) y.push_back(quantile(GevParams(1 + t, 0.5, 0.0), rng.uniform_open()));
    const ForecastDensity fd = forecast_tsgaevm(y, grid, {4, 3, 0}, 60);
    ASSERT_EQ(fd.params.size(), 60u);
    for (std::size_t j = 2; j < fd.params.size(); ++j) {
        const double d2 = fd.params[j].mu() - 2 * fd.params[j - 1].mu() + fd.params[j - 2].mu();
        EXPECT_LT(std::abs(d2), 1e-8);
    }
    std::vector<double> flat;
    for (std::size_t j = 0; j < grid.size(); ++j) flat.push_back(10 + 1e-3 * rng.normal());
    const ForecastDensity f2 = forecast_tsgaevm(flat, grid, {3, 3, 0}, 60);
    const auto q = quantile_curve(f2, 0.5);
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    EXPECT_LT(*hi - *lo, 0.05);
    EXPECT_THROW(forecast_tsgaevm(flat, grid, {3, 3, 0}, 0), ArgumentError);
}

TEST(QuantileCurve, ValuesAndErrors) {
    ForecastDensity fd;
    fd.grid = {1, 2, 3};
    fd.params = {GevParams(1, 1, 0.1), GevParams(2, 1, -0.2), GevParams(3, 2, 0)};
    const auto q = quantile_curve(fd, std::exp(-1.0));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(q[j], fd.params[j].mu(), 1e-12);
    try {
        quantile_curve(fd, 1.0);
        FAIL();
    } catch (const DomainError& e) {
        // The Weibull point (index 1) accepts p = 1, so the first failure is at index 0.
        EXPECT_NE(std::string(e.what()).find("index 0"), std::string::npos);
    }
}

TEST(Forecasters, PositiveScaleEverywhere) {
    DgpSpec spec;
    spec.setting = 3;
    spec.T = 20;
    const SimTruth truth = generate(spec);
    for (const auto& p : forecast_fgev(truth.series, 1).params) EXPECT_GT(p.sigma(), 0);
    for (const auto& p : forecast_fgaevm(truth.series, {5, 5, 0}, 1).params) EXPECT_GT(p.sigma(), 0);
    const auto last = truth.series.curve(truth.series.size() - 1);
    for (const auto& p : forecast_tsgaevm(last, truth.series.grid, {3, 3, 0}, spec.J).params) EXPECT_GT(p.sigma(), 0);
}

TEST(Forecasters, DifferencingOption) {
    const FunctionalSeries s = iid_series(GevParams(0, 1, 0.1), 25, 60, 8);
    ForecastOptions opt;
    opt.difference = true;
    const ForecastDensity fd = forecast_fgev(s, 2, opt);
    EXPECT_EQ(fd.horizon, 2);
    EXPECT_GT(fd.params[0].sigma(), 0);
}
