#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gevcast/error.hpp"
#include "gevcast/random.hpp"
#include "gevcast/var.hpp"

using namespace gevcast;

namespace {

Eigen::MatrixXd simulate_var(const Eigen::VectorXd& c, const std::vector<Eigen::MatrixXd>& a, int t,
                             std::uint64_t seed, double sd = 1.0) {
    Rng rng(seed);
    const Eigen::Index k = c.size();
    const int p = static_cast<int>(a.size());
    const int burn = 200;
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(t + burn, k);
    for (int s = p; s < t + burn; ++s) {
        Eigen::VectorXd v = c;
        for (int i = 0; i < p; ++i) v += a[i] * y.row(s - 1 - i).transpose();
        for (Eigen::Index j = 0; j < k; ++j) v[j] += rng.normal(0, sd);
        y.row(s) = v.transpose();
    }
    return y.bottomRows(t);
}

}  // namespace

TEST(Var, MatchesNormalEquations) {
    Eigen::MatrixXd a(2, 2);
    a << 0.5, 0.1, -0.2, 0.3;
    const Eigen::MatrixXd y = simulate_var(Eigen::Vector2d(1, -1), {a}, 60, 3);
    const VarModel m = fit_var_order(y, 1);
    // Independent oracle: (X'X)^{-1} X'Y via LDLT.
    Eigen::MatrixXd x(59, 3);
    x.col(0).setOnes();
    x.rightCols(2) = y.topRows(59);
    const Eigen::MatrixXd b = (x.transpose() * x).ldlt().solve(x.transpose() * y.bottomRows(59));
    EXPECT_TRUE(m.intercept.isApprox(b.row(0).transpose(), 1e-10));
    EXPECT_TRUE(m.coeff_mats[0].isApprox(b.bottomRows(2).transpose(), 1e-10));
    const Eigen::MatrixXd resid = y.bottomRows(59) - x * b;
    EXPECT_TRUE(m.resid_cov.isApprox(resid.transpose() * resid / 59.0, 1e-10));
}

TEST(Var, AiccFormula) {
    Eigen::Matrix2d cov;
    cov << 2.0, 0.5, 0.5, 1.0;
    const int n = 40, k = 2, p = 2;
    const double params = k * (k * p + 1);
    const double expected = n * std::log(cov.determinant()) + 2 * params * n / (n - params - 1);
    EXPECT_NEAR(var_aicc(cov, n, k, p), expected, 1e-10);
    EXPECT_EQ(var_aicc(Eigen::Matrix2d::Zero(), n, k, p), -std::numeric_limits<double>::infinity());
}

TEST(Var, RecoversCoefficientsAndOrder) {
    Eigen::MatrixXd a1(2, 2), a2(2, 2);
    a1 << 0.4, 0.1, 0.0, 0.3;
    a2 << 0.3, 0.0, 0.1, -0.4;
    const Eigen::MatrixXd y = simulate_var(Eigen::Vector2d(0.5, 0.2), {a1, a2}, 5000, 7);
    // AICC is not consistent, so at large T it may add a spurious lag; it never drops a true one.
    const VarModel m = fit_var(y, 5);
    EXPECT_GE(m.order, 2);
    EXPECT_FALSE(m.fallback);
    EXPECT_LT((m.coeff_mats[0] - a1).cwiseAbs().maxCoeff(), 0.05);
    EXPECT_LT((m.coeff_mats[1] - a2).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Var, FeasibilityAndFallback) {
    EXPECT_TRUE(var_order_feasible(50, 3, 1));   // n = 49, P = 12
    EXPECT_FALSE(var_order_feasible(14, 3, 1));  // n = 13 = P + 1
    EXPECT_TRUE(var_order_feasible(15, 3, 1));
    Rng rng(1);
    Eigen::MatrixXd y(20, 10);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    const VarModel m = fit_var(y);
    EXPECT_TRUE(m.fallback);
    EXPECT_TRUE(std::isnan(m.aicc));
    EXPECT_EQ(m.order, 1);
    // Independent AR(1) per column: off-diagonal terms are zero.
    EXPECT_EQ((m.coeff_mats[0] - Eigen::MatrixXd(m.coeff_mats[0].diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(fit_var(Eigen::MatrixXd::Zero(3, 2)), ArgumentError);
}

TEST(Var, ForecastIteratesRecursion) {
    VarModel m;
    m.order = 2;
    m.intercept = Eigen::Vector2d(1, 0);
    Eigen::Matrix2d a1, a2;
    a1 << 0.5, 0, 0, 0.5;
    a2 << 0.1, 0.2, 0, 0;
    m.coeff_mats = {a1, a2};
    Eigen::MatrixXd hist(3, 2);
    hist << 9, 9, 1, 2, 3, 4;
    const Eigen::MatrixXd f = forecast_var(m, hist, 2);
    const Eigen::Vector2d y1 = m.intercept + a1 * Eigen::Vector2d(3, 4) + a2 * Eigen::Vector2d(1, 2);
    const Eigen::Vector2d y2 = m.intercept + a1 * y1 + a2 * Eigen::Vector2d(3, 4);
    EXPECT_TRUE(f.row(0).transpose().isApprox(y1));
    EXPECT_TRUE(f.row(1).transpose().isApprox(y2));
    EXPECT_THROW(forecast_var(m, hist, 0), ArgumentError);
}

TEST(Var, NoiselessAr1ExactRecovery) {
    Eigen::MatrixXd y(30, 1);
    y(0, 0) = 8.0;
    for (int t = 1; t < 30; ++t) y(t, 0) = 0.5 * y(t - 1, 0);
    const VarModel m = fit_var(y);
    EXPECT_EQ(m.order, 1);
    EXPECT_NEAR(m.coeff_mats[0](0, 0), 0.5, 1e-8);
}

TEST(Var, ConstantSeriesForecastsConstant) {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(25, 2, 3.5);
    const VarModel m = fit_var(y);
    const Eigen::MatrixXd f = forecast_var(m, y, 4);
    EXPECT_LT((f.array() - 3.5).abs().maxCoeff(), 1e-9);
}

TEST(Var, HandExamples) {
    VarModel ar;
    ar.order = 1;
    ar.intercept = Eigen::VectorXd::Zero(1);
    ar.coeff_mats = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
    EXPECT_DOUBLE_EQ(forecast_var(ar, Eigen::MatrixXd::Constant(1, 1, 4.0), 1)(0, 0), 2.0);

    VarModel zero;
    zero.order = 1;
    zero.intercept = Eigen::Vector2d(1.5, -2);
    zero.coeff_mats = {Eigen::MatrixXd::Zero(2, 2)};
    const Eigen::MatrixXd f = forecast_var(zero, Eigen::MatrixXd::Ones(1, 2), 3);
    for (int s = 0; s < 3; ++s) EXPECT_TRUE(f.row(s).transpose().isApprox(zero.intercept));
}

TEST(Var, ForecastIsAffineInHistory) {
    Eigen::MatrixXd a(2, 2);
    a << 0.3, 0.2, -0.1, 0.6;
    const Eigen::MatrixXd y = simulate_var(Eigen::Vector2d(0, 0), {a}, 80, 12);
    VarModel m = fit_var_order(y, 1);
    m.intercept.setZero();
    Eigen::MatrixXd u(1, 2), v(1, 2);
    u << 1.0, -2.0;
    v << 0.5, 3.0;
    const Eigen::MatrixXd fu = forecast_var(m, u, 3), fv = forecast_var(m, v, 3), fs = forecast_var(m, 2 * u + v, 3);
    EXPECT_TRUE(fs.isApprox(2 * fu + fv, 1e-12));
}

TEST(Var, AiccPicksTrueOrderMostOften) {
    Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(3, 3), a2 = Eigen::MatrixXd::Zero(3, 3);
    a1.diagonal() << 0.2, 0.1, 0.15;
    a2.diagonal() << 0.7, -0.6, 0.65;
    int hits = 0;
    for (int r = 0; r < 100; ++r) {
        const Eigen::MatrixXd y = simulate_var(Eigen::Vector3d(0, 0, 0), {a1, a2}, 50, derive_seed(99, r));
        if (fit_var(y, 5).order == 2) ++hits;
    }
    EXPECT_GT(hits, 50);
}
