#include "gevcast/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "gevcast/error.hpp"
#include "gevcast/optim.hpp"

namespace gevcast {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool gumbel(double xi) { return std::abs(xi) < kGumbelThreshold; }

}  // namespace

GevParams::GevParams(double mu, double sigma, double xi) : mu_(mu), sigma_(sigma), xi_(xi) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(xi)) {
        std::ostringstream msg;
        msg << "GEV parameters must be finite (mu=" << mu << ", sigma=" << sigma << ", xi=" << xi << ")";
        throw ArgumentError(msg.str());
    }
    if (!(sigma > 0.0)) {
        std::ostringstream msg;
        msg << "GEV scale must be positive, got sigma=" << sigma;
        throw ArgumentError(msg.str());
    }
}

bool GevParams::is_gumbel() const noexcept { return gumbel(xi_); }

bool GevParams::in_support(double x) const noexcept {
    return is_gumbel() || 1.0 + xi_ * (x - mu_) / sigma_ > 0.0;
}

double pdf(const GevParams& p, double x) noexcept {
    const double z = (x - p.mu()) / p.sigma();
    if (p.is_gumbel()) return std::exp(-z - std::exp(-z)) / p.sigma();
    const double xi = p.xi();
    if (!(1.0 + xi * z > 0.0)) return 0.0;
    const double lt = std::log1p(xi * z);
    return std::exp(-(1.0 / xi + 1.0) * lt - std::exp(-lt / xi)) / p.sigma();
}

double cdf(const GevParams& p, double x) noexcept {
    const double z = (x - p.mu()) / p.sigma();
    if (p.is_gumbel()) return std::exp(-std::exp(-z));
    const double xi = p.xi();
    if (!(1.0 + xi * z > 0.0)) return xi > 0.0 ? 0.0 : 1.0;
    return std::exp(-std::exp(-std::log1p(xi * z) / xi));
}

double quantile(const GevParams& p, double prob) {
    const double xi = p.xi();
    auto reject = [&](const char* range, const char* branch) {
        std::ostringstream msg;
        msg << "quantile: probability " << prob << " outside " << range << " for the " << branch << " branch";
        throw DomainError(msg.str());
    };
    if (std::isnan(prob)) reject("[0, 1]", "any");
    if (p.is_gumbel()) {
        if (!(prob > 0.0 && prob < 1.0)) reject("(0, 1)", "xi = 0");
        return p.mu() - p.sigma() * std::log(-std::log(prob));
    }
    if (xi > 0.0 && !(prob >= 0.0 && prob < 1.0)) reject("[0, 1)", "xi > 0");
    if (xi < 0.0 && !(prob > 0.0 && prob <= 1.0)) reject("(0, 1]", "xi < 0");
    // (-ln p)^(-xi) - 1 written as expm1 to stay accurate for small xi.
    const double log_y = std::log(-std::log(prob));
    return p.mu() + p.sigma() * std::expm1(-xi * log_y) / xi;
}

double log_likelihood(const GevParams& p, std::span<const double> data) {
    if (data.empty()) throw ArgumentError("log_likelihood: data must be nonempty");
    const double log_sigma = std::log(p.sigma());
    const auto n = static_cast<double>(data.size());
    if (p.is_gumbel()) {
        double sum = 0.0;
        for (double x : data) {
            const double z = (x - p.mu()) / p.sigma();
            sum += z + std::exp(-z);
        }
        return -n * log_sigma - sum;
    }
    const double xi = p.xi();
    double sum_log = 0.0;
    double sum_pow = 0.0;
    for (double x : data) {
        const double t = xi * (x - p.mu()) / p.sigma();
        if (!(1.0 + t > 0.0)) return kNegInf;
        const double lt = std::log1p(t);
        sum_log += lt;
        sum_pow += std::exp(-lt / xi);
    }
    const double value = -n * log_sigma - (1.0 + 1.0 / xi) * sum_log - sum_pow;
    return std::isnan(value) ? kNegInf : value;
}

namespace detail {

double log_pdf_with_gradient(double x, double mu, double log_sigma, double xi, double grad[3]) noexcept {
    const double sigma = std::exp(log_sigma);
    const double z = (x - mu) / sigma;
    if (gumbel(xi)) {
        // The xi-derivative is the first-order term of the expansion around xi = 0.
        const double ez = std::exp(-z);
        grad[0] = (1.0 - ez) / sigma;
        grad[1] = -1.0 + z * (1.0 - ez);
        grad[2] = -z + 0.5 * z * z * (1.0 - ez);
        return -log_sigma - z - ez;
    }
    const double xz = xi * z;
    if (!(1.0 + xz > 0.0)) return kNegInf;
    const double t = 1.0 + xz;
    const double lt = std::log1p(xz);
    const double a = std::exp(-lt / xi);
    const double value = -log_sigma - (1.0 + 1.0 / xi) * lt - a;
    if (!std::isfinite(value)) return kNegInf;
    const double common = (1.0 + xi - a) / t;
    grad[0] = common / sigma;
    grad[1] = -1.0 + z * common;
    grad[2] = (1.0 - a) * lt / (xi * xi) + z * ((a - 1.0) / xi - 1.0) / t;
    return value;
}

}  // namespace detail

GevParams moment_initializer(std::span<const double> data) {
    const auto n = static_cast<double>(data.size());
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : data) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
    const double sigma0 = std::max(std::sqrt(6.0) * sd / std::numbers::pi, 1e-8);
    const double mu0 = mean - 0.5772 * sigma0;
    return GevParams(mu0, sigma0, 0.1);
}

GevFitResult fit_mle(std::span<const double> data, std::optional<GevParams> init) {
    if (data.size() < 10) {
        throw ArgumentError("fit_mle: need at least 10 observations, got " + std::to_string(data.size()));
    }
    for (double x : data) {
        if (!std::isfinite(x)) throw ArgumentError("fit_mle: data contain non-finite values");
    }
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    if (*lo == *hi) throw DegenerateDataError("fit_mle: all observations are identical");

    GevParams start = init.value_or(moment_initializer(data));
    if (!std::isfinite(log_likelihood(start, data))) {
        start = moment_initializer(data);
        if (!std::isfinite(log_likelihood(start, data))) start = GevParams(start.mu(), start.sigma(), 0.0);
    }

    const optim::DifferentiableObjective objective = [data](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
        const double xi = theta[2];
        if (!(xi >= kShapeLowerBound && xi <= kShapeUpperBound)) return optim::kPenalty;
        double total = 0.0;
        double g_sum[3] = {0.0, 0.0, 0.0};
        double g[3];
        for (double x : data) {
            const double lp = detail::log_pdf_with_gradient(x, theta[0], theta[1], xi, g);
            if (!std::isfinite(lp)) return optim::kPenalty;
            total += lp;
            g_sum[0] += g[0];
            g_sum[1] += g[1];
            g_sum[2] += g[2];
        }
        if (grad) {
            grad->resize(3);
            *grad << -g_sum[0], -g_sum[1], -g_sum[2];
        }
        return -total;
    };

    Eigen::VectorXd theta0(3);
    theta0 << start.mu(), std::log(start.sigma()), start.xi();
    const optim::Result opt = optim::minimize(objective, theta0);

    GevParams fitted(opt.x[0], std::exp(opt.x[1]), opt.x[2]);
    double ll = log_likelihood(fitted, data);
    const double ll_start = log_likelihood(start, data);
    if (!(ll >= ll_start)) {
        fitted = start;
        ll = ll_start;
    }
    const bool regular = fitted.xi() >= -0.5;
    return GevFitResult{fitted, ll, opt.converged && regular && std::isfinite(ll), data.size()};
}

}  // namespace gevcast
