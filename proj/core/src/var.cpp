#include "gevcast/var.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "gevcast/error.hpp"

namespace gevcast {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Rows [order, T) regressed on [1, y_{t-1}, ..., y_{t-order}].
Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& y, int order) {
    const Eigen::Index t = y.rows(), k = y.cols();
    const Eigen::Index n = t - order;
    Eigen::MatrixXd x(n, 1 + k * order);
    x.col(0).setOnes();
    for (int lag = 1; lag <= order; ++lag) {
        x.middleCols(1 + k * (lag - 1), k) = y.middleRows(order - lag, n);
    }
    return x;
}

void check_series(const Eigen::MatrixXd& series) {
    if (series.rows() < 4) {
        throw ArgumentError("fit_var: need at least 4 observations, got " + std::to_string(series.rows()));
    }
    if (series.cols() < 1) throw ArgumentError("fit_var: series has no columns");
    if (!series.allFinite()) throw ArgumentError("fit_var: series contains non-finite values");
}

VarModel fallback_ar1(const Eigen::MatrixXd& series) {
    const Eigen::Index t = series.rows(), k = series.cols();
    VarModel m;
    m.order = 1;
    m.fallback = true;
    m.aicc = std::numeric_limits<double>::quiet_NaN();
    m.intercept.resize(k);
    m.coeff_mats.assign(1, Eigen::MatrixXd::Zero(k, k));
    m.residuals.resize(t - 1, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::MatrixXd x(t - 1, 2);
        x.col(0).setOnes();
        x.col(1) = series.col(c).head(t - 1);
        const Eigen::VectorXd target = series.col(c).tail(t - 1);
        const Eigen::VectorXd b = x.completeOrthogonalDecomposition().solve(target);
        m.intercept[c] = b[0];
        m.coeff_mats[0](c, c) = b[1];
        m.residuals.col(c) = target - x * b;
    }
    m.resid_cov = m.residuals.transpose() * m.residuals / static_cast<double>(t - 1);
    return m;
}

}  // namespace

bool var_order_feasible(int t, int k, int order) {
    const long n = t - order;
    const long params = static_cast<long>(k) * (static_cast<long>(k) * order + 1);
    return order >= 1 && n > params + 1;
}

double var_aicc(const Eigen::MatrixXd& resid_cov, int n, int k, int order) {
    const double params = static_cast<double>(k) * (static_cast<double>(k) * order + 1);
    const double penalty = 2.0 * params * n / (n - params - 1.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(resid_cov, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double scale = std::max(ev.maxCoeff(), 1.0);
    if (ev.minCoeff() <= 1e-24 * scale) return kNegInf;
    return static_cast<double>(n) * ev.array().log().sum() + penalty;
}

VarModel fit_var_order(const Eigen::MatrixXd& series, int order) {
    check_series(series);
    if (order < 1 || series.rows() - order < 2) {
        throw ArgumentError("fit_var: order " + std::to_string(order) + " leaves too few observations");
    }
    const Eigen::Index k = series.cols();
    const Eigen::Index n = series.rows() - order;
    const Eigen::MatrixXd x = lagged_design(series, order);
    const Eigen::MatrixXd y = series.bottomRows(n);
    const Eigen::MatrixXd b = x.completeOrthogonalDecomposition().solve(y);  // (1 + k p) x k

    VarModel m;
    m.order = order;
    m.intercept = b.row(0).transpose();
    for (int lag = 1; lag <= order; ++lag) {
        m.coeff_mats.push_back(b.middleRows(1 + k * (lag - 1), k).transpose());
    }
    m.residuals = y - x * b;
    m.resid_cov = m.residuals.transpose() * m.residuals / static_cast<double>(n);
    m.aicc = var_aicc(m.resid_cov, static_cast<int>(n), static_cast<int>(k), order);
    return m;
}

VarModel fit_var(const Eigen::MatrixXd& series, int max_order) {
    check_series(series);
    if (max_order < 1) throw ArgumentError("fit_var: max_order must be at least 1");
    const int t = static_cast<int>(series.rows());
    const int k = static_cast<int>(series.cols());
    if (!var_order_feasible(t, k, 1)) return fallback_ar1(series);

    VarModel best;
    bool have = false;
    for (int p = 1; p <= max_order; ++p) {
        if (!var_order_feasible(t, k, p)) continue;
        VarModel m = fit_var_order(series, p);
        if (!have || m.aicc < best.aicc) {
            best = std::move(m);
            have = true;
        }
    }
    return best;
}

VarModel fit_var(const CoeffSeries& series, int max_order) { return fit_var(series.values, max_order); }

Eigen::MatrixXd forecast_var(const VarModel& model, const Eigen::MatrixXd& history, int h) {
    if (h < 1) throw ArgumentError("forecast_var: horizon must be at least 1");
    const Eigen::Index k = model.intercept.size();
    if (history.cols() != k) throw ArgumentError("forecast_var: history has the wrong number of columns");
    if (history.rows() < model.order) throw ArgumentError("forecast_var: history shorter than the model order");

    // Rolling window: row 0 is the most recent value.
    Eigen::MatrixXd lags(model.order, k);
    for (int i = 0; i < model.order; ++i) lags.row(i) = history.row(history.rows() - 1 - i);

    Eigen::MatrixXd out(h, k);
    for (int step = 0; step < h; ++step) {
        Eigen::VectorXd next = model.intercept;
        for (int i = 0; i < model.order; ++i) next += model.coeff_mats[static_cast<std::size_t>(i)] * lags.row(i).transpose();
        out.row(step) = next.transpose();
        for (int i = model.order - 1; i > 0; --i) lags.row(i) = lags.row(i - 1);
        lags.row(0) = next.transpose();
    }
    return out;
}

}  // namespace gevcast
