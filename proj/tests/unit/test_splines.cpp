#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gevcast/error.hpp"
#include "gevcast/splines.hpp"

using namespace gevcast;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// Cox-de Boor recursion, written independently of the library.
double cox_de_boor(const std::vector<double>& t, int i, int k, double x) {
    if (k == 0) {
        if (t[i] <= x && x < t[i + 1]) return 1.0;
        // Right end of the domain belongs to the last non-empty span.
        if (x == t.back() && t[i] < t[i + 1] && t[i + 1] == t.back()) return 1.0;
        return 0.0;
    }
    double a = 0, b = 0;
    if (t[i + k] > t[i]) a = (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(t, i, k - 1, x);
    if (t[i + k + 1] > t[i + 1]) b = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(t, i + 1, k - 1, x);
    return a + b;
}

}  // namespace

TEST(Splines, RawBasisMatchesRecursionAndSumsToOne) {
    const auto grid = linspace(0, 1, 30);
    for (int d = kMinBasisDim; d <= kMaxBasisDim; ++d) {
        const SplineBasis b = make_basis({0, 1}, d, grid);
        ASSERT_EQ(b.knots().size(), static_cast<std::size_t>(d + 5));
        const auto tau = linspace(0, 1, 101);
        const Eigen::MatrixXd raw = eval_raw_basis(b, tau);
        ASSERT_EQ(raw.cols(), d + 1);
        for (int r = 0; r < raw.rows(); ++r) {
            EXPECT_NEAR(raw.row(r).sum(), 1.0, 1e-12);
            for (int i = 0; i <= d; ++i) EXPECT_NEAR(raw(r, i), cox_de_boor(b.knots(), i, 3, tau[r]), 1e-12);
        }
    }
}

TEST(Splines, CentredOverGrid) {
    const auto grid = linspace(1, 366, 366);
    const SplineBasis b = make_basis({1, 366}, 7, grid);
    const Eigen::MatrixXd m = eval_basis(b, grid);
    ASSERT_EQ(m.cols(), 7);
    for (int c = 0; c < m.cols(); ++c) EXPECT_NEAR(m.col(c).mean(), 0.0, 1e-12);
}

TEST(Splines, DerivativesMatchFiniteDifferences) {
    const auto grid = linspace(0, 2, 50);
    const SplineBasis b = make_basis({0, 2}, 6, grid);
    std::vector<double> d(7), lo(7), hi(7);
    for (double x : {0.1, 0.55, 1.0, 1.73}) {
        b.raw_derivatives(x, d);
        b.raw_values(x - 1e-6, lo);
        b.raw_values(x + 1e-6, hi);
        for (int i = 0; i < 7; ++i) EXPECT_NEAR(d[i], (hi[i] - lo[i]) / 2e-6, 1e-5);
    }
}

TEST(Splines, Errors) {
    const auto grid = linspace(0, 1, 10);
    EXPECT_THROW(make_basis({0, 1}, 2, grid), ArgumentError);
    EXPECT_THROW(make_basis({0, 1}, 11, grid), ArgumentError);
    EXPECT_THROW(make_basis({1, 1}, 5, grid), ArgumentError);
    const SplineBasis b = make_basis({0, 1}, 5, grid);
    const std::vector<double> outside = {1.5};
    EXPECT_THROW(eval_basis(b, outside), DomainError);
}

TEST(Splines, LeastSquaresReproducesSplineCurves) {
    const auto grid = linspace(0, 1, 40);
    auto basis = std::make_shared<const SplineBasis>(make_basis({0, 1}, 5, grid));
    ParamCurve truth{0.7, {1.0, -2.0, 0.5, 0.3, -1.1}, basis};
    const auto y = eval_curve(truth, grid);
    const ParamCurve fit = fit_least_squares(basis, grid, y);
    EXPECT_NEAR(fit.intercept, truth.intercept, 1e-10);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(fit.coeffs[i], truth.coeffs[i], 1e-9);
}

TEST(Splines, CubicPolynomialsAreExact) {
    // Cubic splines contain all cubic polynomials.
    const auto grid = linspace(-1, 3, 60);
    auto basis = std::make_shared<const SplineBasis>(make_basis({-1, 3}, 4, grid));
    std::vector<double> y;
    for (double x : grid) y.push_back(1 - 2 * x + 0.5 * x * x - 0.25 * x * x * x);
    const ParamCurve fit = fit_least_squares(basis, grid, y);
    const auto back = eval_curve(fit, grid);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(back[i], y[i], 1e-10);
}

TEST(Splines, LinearExtrapolation) {
    const auto grid = linspace(0, 1, 30);
    auto basis = std::make_shared<const SplineBasis>(make_basis({0, 1}, 5, grid));
    ParamCurve c{0.2, {0.3, -0.4, 0.9, 0.1, -0.6}, basis};
    const std::vector<double> inside = {0.2, 1.0};
    const std::vector<double> beyond = {1.0, 1.1, 1.2};
    const auto a = eval_curve(c, inside);
    const auto e = eval_curve_extrapolated(c, beyond);
    EXPECT_NEAR(e[0], a[1], 1e-12);
    EXPECT_NEAR(e[2] - e[1], e[1] - e[0], 1e-12);  // straight line beyond the end
    const std::vector<double> near_end = {1.0 - 1e-7};
    const double slope = (e[0] - eval_curve(c, near_end)[0]) / 1e-7;
    EXPECT_NEAR(e[1] - e[0], 0.1 * slope, 1e-5);
    const ParamCurve constant{1.5, {}, nullptr};
    EXPECT_EQ(eval_curve_extrapolated(constant, beyond)[2], 1.5);
}
