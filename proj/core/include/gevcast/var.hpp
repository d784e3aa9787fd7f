#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace gevcast {

enum class Transform { identity, log };

/// Multivariate series: row t holds the k latent parameters of year t.
struct CoeffSeries {
    Eigen::MatrixXd values;  // T x k
    std::vector<std::string> labels;
    std::vector<Transform> transforms;
};

/// Least-squares vector autoregression y_t = c + sum_i A_i y_{t-i} + e_t.
struct VarModel {
    int order = 1;
    Eigen::VectorXd intercept;
    std::vector<Eigen::MatrixXd> coeff_mats;  // order matrices, k x k
    Eigen::MatrixXd residuals;                // (T - order) x k
    Eigen::MatrixXd resid_cov;                // k x k, divisor T - order
    double aicc = 0.0;                        // NaN for the fallback model
    /// True when even VAR(1) was infeasible and k independent AR(1) models were fitted instead.
    bool fallback = false;

    int dim() const noexcept { return static_cast<int>(intercept.size()); }
};

/// Small-sample corrected AIC: n ln det(Sigma) + 2 P n / (n - P - 1) with
/// n = T - p and P = k (k p + 1). Returns -infinity for an exact
/// (singular-residual) fit.
double var_aicc(const Eigen::MatrixXd& resid_cov, int n, int k, int order);

/// True when order p leaves n = T - p > P + 1 observations.
bool var_order_feasible(int t, int k, int order);

/// Fits VAR(p) for p = 1..max_order (skipping infeasible orders) and keeps
/// the AICC minimiser, ties to the smaller order. Falls back to independent
/// AR(1) fits when VAR(1) is infeasible. Throws ArgumentError when T < 4.
VarModel fit_var(const Eigen::MatrixXd& series, int max_order = 5);
VarModel fit_var(const CoeffSeries& series, int max_order = 5);

/// VAR of a fixed order without selection (no feasibility fallback).
VarModel fit_var_order(const Eigen::MatrixXd& series, int order);

/// Iterated conditional-mean forecasts from the last `order` rows of
/// history; returns h x k.
Eigen::MatrixXd forecast_var(const VarModel& model, const Eigen::MatrixXd& history, int h);

}  // namespace gevcast
