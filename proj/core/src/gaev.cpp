#include "gevcast/gaev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gevcast/error.hpp"
#include "gevcast/forecast.hpp"
#include "gevcast/metrics.hpp"
#include "gevcast/optim.hpp"
#include "gevcast/parallel.hpp"

namespace gevcast {

void GaevDims::validate() const {
    for (int d : {d_mu, d_sigma, d_xi}) {
        if (d != 0 && (d < kMinBasisDim || d > kMaxBasisDim)) {
            throw ArgumentError("GaevDims: each dimension must be 0 or lie in [3, 10], got " + to_string());
        }
    }
}

std::string GaevDims::to_string() const {
    std::ostringstream out;
    out << "(" << d_mu << ", " << d_sigma << ", " << d_xi << ")";
    return out.str();
}

namespace {

std::shared_ptr<const SplineBasis> basis_or_null(Interval domain, int d, std::span<const double> grid) {
    if (d == 0) return nullptr;
    return std::make_shared<const SplineBasis>(make_basis(domain, d, grid));
}

Eigen::MatrixXd design_matrix(const std::shared_ptr<const SplineBasis>& basis, std::span<const double> grid) {
    const auto rows = static_cast<Eigen::Index>(grid.size());
    if (!basis) return Eigen::MatrixXd::Ones(rows, 1);
    Eigen::MatrixXd out(rows, basis->dim() + 1);
    out.col(0).setOnes();
    out.rightCols(basis->dim()) = eval_basis(*basis, grid);
    return out;
}

ParamCurve curve_from(const std::shared_ptr<const SplineBasis>& basis, const Eigen::VectorXd& block) {
    ParamCurve c;
    c.intercept = block[0];
    c.coeffs.assign(block.data() + 1, block.data() + block.size());
    c.basis = basis;
    return c;
}

void append(Eigen::VectorXd& out, Eigen::Index& pos, const ParamCurve& c) {
    out[pos++] = c.intercept;
    for (double b : c.coeffs) out[pos++] = b;
}

std::vector<GevParams> assemble(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                                const std::vector<double>& xi) {
    std::vector<GevParams> out;
    out.reserve(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) out.emplace_back(mu[j], std::exp(log_sigma[j]), xi[j]);
    return out;
}

}  // namespace

GaevDesign::GaevDesign(std::vector<double> grid, GaevDims dims, std::optional<Interval> domain)
    : grid_(std::move(grid)), dims_(dims) {
    dims_.validate();
    if (grid_.size() < 2) throw ArgumentError("GaevDesign: grid needs at least two points");
    for (std::size_t j = 1; j < grid_.size(); ++j) {
        if (!(grid_[j] > grid_[j - 1])) throw ArgumentError("GaevDesign: grid must be strictly increasing");
    }
    domain_ = domain.value_or(Interval{grid_.front(), grid_.back()});
    mu_basis_ = basis_or_null(domain_, dims_.d_mu, grid_);
    sigma_basis_ = basis_or_null(domain_, dims_.d_sigma, grid_);
    xi_basis_ = basis_or_null(domain_, dims_.d_xi, grid_);
    mu_design_ = design_matrix(mu_basis_, grid_);
    sigma_design_ = design_matrix(sigma_basis_, grid_);
    xi_design_ = design_matrix(xi_basis_, grid_);
}

Eigen::VectorXd GaevFit::stacked() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(mu_curve.coeffs.size() + log_sigma_curve.coeffs.size() +
                                                   xi_curve.coeffs.size() + 3));
    Eigen::Index pos = 0;
    append(out, pos, mu_curve);
    append(out, pos, log_sigma_curve);
    append(out, pos, xi_curve);
    return out;
}

std::vector<GevParams> GaevFit::params_at(std::span<const double> tau) const {
    return assemble(eval_curve(mu_curve, tau), eval_curve(log_sigma_curve, tau), eval_curve(xi_curve, tau));
}

std::vector<GevParams> GaevFit::params_at_extrapolated(std::span<const double> tau) const {
    return assemble(eval_curve_extrapolated(mu_curve, tau), eval_curve_extrapolated(log_sigma_curve, tau),
                    eval_curve_extrapolated(xi_curve, tau));
}

GaevFit gaev_from_stacked(const GaevDesign& design, const Eigen::VectorXd& stacked) {
    const GaevDims dims = design.dims();
    if (stacked.size() != dims.total_coefficients()) {
        throw ArgumentError("gaev_from_stacked: expected " + std::to_string(dims.total_coefficients()) +
                            " coefficients, got " + std::to_string(stacked.size()));
    }
    GaevFit fit;
    fit.mu_curve = curve_from(design.mu_basis(), stacked.segment(0, dims.d_mu + 1));
    fit.log_sigma_curve = curve_from(design.sigma_basis(), stacked.segment(dims.d_mu + 1, dims.d_sigma + 1));
    fit.xi_curve = curve_from(design.xi_basis(), stacked.tail(dims.d_xi + 1));
    return fit;
}

GaevFit fit_gaev(std::span<const double> curve, const GaevDesign& design, const std::optional<Eigen::VectorXd>& init) {
    const GaevDims dims = design.dims();
    const std::size_t n = design.grid().size();
    if (curve.size() != n) throw ArgumentError("fit_gaev: curve and grid differ in length");
    if (n < static_cast<std::size_t>(dims.total_coefficients() + 5)) {
        throw ArgumentError("fit_gaev: " + std::to_string(n) + " points cannot support " +
                            std::to_string(dims.total_coefficients()) + " coefficients");
    }
    for (double x : curve) {
        if (!std::isfinite(x)) throw ArgumentError("fit_gaev: curve contains non-finite values");
    }

    const Eigen::MatrixXd& xm = design.mu_design();
    const Eigen::MatrixXd& xs = design.sigma_design();
    const Eigen::MatrixXd& xx = design.xi_design();
    const Eigen::Index km = xm.cols(), ks = xs.cols(), kx = xx.cols();
    const Eigen::Index total = km + ks + kx;
    const Eigen::Map<const Eigen::VectorXd> y(curve.data(), static_cast<Eigen::Index>(n));

    // Negative penalised log-likelihood and its gradient.
    const optim::DifferentiableObjective objective = [&](const Eigen::VectorXd& beta, Eigen::VectorXd* grad) {
        const Eigen::VectorXd mu = xm * beta.segment(0, km);
        const Eigen::VectorXd ls = xs * beta.segment(km, ks);
        const Eigen::VectorXd xi = xx * beta.segment(km + ks, kx);
        Eigen::VectorXd gm(static_cast<Eigen::Index>(n)), gs(static_cast<Eigen::Index>(n)),
            gx(static_cast<Eigen::Index>(n));
        double ll = 0.0;
        double g[3];
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
            if (!(xi[j] >= kGaevShapeLowerBound && xi[j] <= kGaevShapeUpperBound)) return optim::kPenalty;
            const double lp = detail::log_pdf_with_gradient(y[j], mu[j], ls[j], xi[j], g);
            if (!std::isfinite(lp)) return optim::kPenalty;
            ll += lp;
            gm[j] = g[0];
            gs[j] = g[1];
            gx[j] = g[2];
        }
        const double ridge = beta.segment(1, km - 1).squaredNorm() + beta.segment(km + 1, ks - 1).squaredNorm() +
                             beta.segment(km + ks + 1, kx - 1).squaredNorm();
        if (grad) {
            grad->resize(total);
            grad->segment(0, km) = -xm.transpose() * gm;
            grad->segment(km, ks) = -xs.transpose() * gs;
            grad->segment(km + ks, kx) = -xx.transpose() * gx;
            Eigen::VectorXd ridge_grad = 2.0 * kGaevRidge * beta;
            ridge_grad[0] = ridge_grad[km] = ridge_grad[km + ks] = 0.0;
            *grad += ridge_grad;
        }
        return -ll + kGaevRidge * ridge;
    };

    Eigen::VectorXd start;
    if (init && init->size() == total && objective(*init, nullptr) < optim::kPenalty) {
        start = *init;
    } else {
        const GevFitResult pooled = fit_mle(curve);
        start = Eigen::VectorXd::Zero(total);
        start[0] = pooled.params.mu();
        start[km] = std::log(pooled.params.sigma());
        start[km + ks] = std::clamp(pooled.params.xi(), 0.9 * kGaevShapeLowerBound, 0.9 * kGaevShapeUpperBound);
    }

    const optim::Result opt = optim::minimize(objective, start);
    GaevFit fit = gaev_from_stacked(design, opt.x);
    const std::vector<GevParams> params = fit.params_at(design.grid());
    double ll = 0.0;
    for (std::size_t j = 0; j < n; ++j) ll += std::log(pdf(params[j], curve[j]));
    fit.log_likelihood = ll;
    fit.converged = opt.converged && std::isfinite(ll);
    return fit;
}

GaevFit fit_gaev(std::span<const double> curve, std::span<const double> grid, GaevDims dims,
                 const std::optional<Eigen::VectorXd>& init) {
    const GaevDesign design(std::vector<double>(grid.begin(), grid.end()), dims);
    return fit_gaev(curve, design, init);
}

std::vector<GaevDims> coarse_candidate_grid(bool free_xi) {
    const std::vector<int> levels = {3, 5, 7, 9};
    std::vector<int> xi_levels = free_xi ? levels : std::vector<int>{0};
    std::vector<GaevDims> out;
    for (int dm : levels)
        for (int ds : levels)
            for (int dx : xi_levels) out.push_back({dm, ds, dx});
    return out;
}

std::vector<GaevDims> full_candidate_grid(bool free_xi) {
    std::vector<int> levels;
    for (int d = kMinBasisDim; d <= kMaxBasisDim; ++d) levels.push_back(d);
    std::vector<int> xi_levels = free_xi ? levels : std::vector<int>{0};
    std::vector<GaevDims> out;
    for (int dm : levels)
        for (int ds : levels)
            for (int dx : xi_levels) out.push_back({dm, ds, dx});
    return out;
}

GaevDims best_candidate(std::span<const CvScore> scores) {
    const CvScore* best = nullptr;
    for (const auto& s : scores) {
        if (std::isnan(s.score)) continue;
        if (!best || s.score < best->score ||
            (s.score == best->score &&
             std::pair(s.dims.total_coefficients(), s.dims) < std::pair(best->dims.total_coefficients(), best->dims))) {
            best = &s;
        }
    }
    if (!best) {
        std::ostringstream msg;
        msg << "select_dims: every candidate failed:";
        for (const auto& s : scores) msg << "\n  " << s.dims.to_string() << ": " << s.error;
        throw FitError(msg.str());
    }
    return best->dims;
}

CvResult cross_validate(const FunctionalSeries& series, std::span<const GaevDims> candidates, int max_var_order) {
    if (candidates.empty()) throw ArgumentError("select_dims: candidate grid is empty");
    if (series.size() < 5) throw ArgumentError("select_dims: need at least 5 curves");
    for (const auto& c : candidates) c.validate();

    const FunctionalSeries train = series.head(series.size() - 1);
    const std::vector<double> held_out = series.curve(series.size() - 1);
    const ForecastOptions options{max_var_order, false};

    CvResult result;
    result.scores.resize(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
        CvScore& s = result.scores[i];
        s.dims = candidates[i];
        s.score = std::numeric_limits<double>::quiet_NaN();
        try {
            const ForecastDensity fd = forecast_fgaevm(train, candidates[i], 1, options);
            s.score = curve_jsd(held_out, quantile_curve(fd, 0.5));
        } catch (const std::exception& e) {
            s.error = e.what();
        }
    });

    result.selected = best_candidate(result.scores);
    return result;
}

GaevDims select_dims(const FunctionalSeries& series, std::span<const GaevDims> candidates, int max_var_order) {
    return cross_validate(series, candidates, max_var_order).selected;
}

}  // namespace gevcast
