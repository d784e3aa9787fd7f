#include "gevcast/splines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "gevcast/error.hpp"

namespace gevcast {

namespace {

constexpr int kDegree = 3;

// Index i of the knot span [t_i, t_{i+1}) containing x, restricted to the
// clamped range so that x == hi falls into the last nonempty span.
std::size_t find_span(const std::vector<double>& t, std::size_t n_funcs, double x) {
    const std::size_t lo = kDegree;
    const std::size_t hi = n_funcs - 1;
    if (x >= t[hi + 1]) return hi;
    const auto it = std::upper_bound(t.begin() + static_cast<std::ptrdiff_t>(lo),
                                     t.begin() + static_cast<std::ptrdiff_t>(hi + 1), x);
    return static_cast<std::size_t>(it - t.begin()) - 1;
}

// Nonzero B-splines of the given degree on span i (functions i-degree .. i).
void nonzero_basis(const std::vector<double>& t, std::size_t i, double x, int degree, double* out) {
    std::array<double, kDegree + 1> left{};
    std::array<double, kDegree + 1> right{};
    out[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - t[i + 1 - j];
        right[j] = t[i + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

void check_in_domain(const SplineBasis& basis, std::span<const double> tau) {
    const Interval dom = basis.domain();
    for (std::size_t j = 0; j < tau.size(); ++j) {
        if (!(tau[j] >= dom.lo && tau[j] <= dom.hi)) {
            std::ostringstream msg;
            msg << "spline evaluation point tau[" << j << "]=" << tau[j] << " outside domain [" << dom.lo << ", "
                << dom.hi << "]";
            throw DomainError(msg.str());
        }
    }
}

}  // namespace

void SplineBasis::raw_values(double x, std::span<double> out) const {
    const std::size_t n = static_cast<std::size_t>(dim_) + 1;
    std::fill(out.begin(), out.end(), 0.0);
    x = std::clamp(x, domain_.lo, domain_.hi);
    const std::size_t i = find_span(knots_, n, x);
    std::array<double, kDegree + 1> local{};
    nonzero_basis(knots_, i, x, kDegree, local.data());
    for (int r = 0; r <= kDegree; ++r) out[i - kDegree + static_cast<std::size_t>(r)] = local[r];
}

void SplineBasis::raw_derivatives(double x, std::span<double> out) const {
    const std::size_t n = static_cast<std::size_t>(dim_) + 1;
    std::fill(out.begin(), out.end(), 0.0);
    x = std::clamp(x, domain_.lo, domain_.hi);
    const std::size_t i = find_span(knots_, n, x);
    // Quadratic B-splines N_{k,2} for k = i-2 .. i.
    std::array<double, kDegree + 1> quad{};
    nonzero_basis(knots_, i, x, kDegree - 1, quad.data());
    auto quad_at = [&](std::size_t k) -> double {
        if (k + 2 < i || k > i) return 0.0;
        return quad[k + 2 - i];
    };
    for (std::size_t k = i - kDegree; k <= i; ++k) {
        double d = 0.0;
        const double den_left = knots_[k + kDegree] - knots_[k];
        const double den_right = knots_[k + kDegree + 1] - knots_[k + 1];
        if (den_left > 0.0) d += quad_at(k) / den_left;
        if (den_right > 0.0) d -= quad_at(k + 1) / den_right;
        out[k] = kDegree * d;
    }
}

SplineBasis make_basis(Interval domain, int d, std::span<const double> centering_grid) {
    if (d < kMinBasisDim || d > kMaxBasisDim) {
        throw ArgumentError("make_basis: dimension must lie in [3, 10], got " + std::to_string(d));
    }
    if (!(domain.hi > domain.lo) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi)) {
        throw ArgumentError("make_basis: domain must be a nonempty finite interval");
    }
    if (centering_grid.empty()) throw ArgumentError("make_basis: centring grid is empty");

    SplineBasis basis;
    basis.domain_ = domain;
    basis.dim_ = d;
    const int interior = d + 1 - (kDegree + 1);
    basis.knots_.assign(kDegree + 1, domain.lo);
    for (int k = 1; k <= interior; ++k) {
        basis.knots_.push_back(domain.lo + (domain.hi - domain.lo) * k / (interior + 1));
    }
    basis.knots_.insert(basis.knots_.end(), kDegree + 1, domain.hi);

    check_in_domain(basis, centering_grid);
    basis.grid_.assign(centering_grid.begin(), centering_grid.end());
    basis.offsets_.assign(static_cast<std::size_t>(d), 0.0);
    std::vector<double> row(static_cast<std::size_t>(d) + 1);
    for (double x : centering_grid) {
        basis.raw_values(x, row);
        for (int c = 0; c < d; ++c) basis.offsets_[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c) + 1];
    }
    for (double& o : basis.offsets_) o /= static_cast<double>(centering_grid.size());
    return basis;
}

Eigen::MatrixXd eval_raw_basis(const SplineBasis& basis, std::span<const double> tau) {
    check_in_domain(basis, tau);
    const auto n = static_cast<Eigen::Index>(basis.dim() + 1);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tau.size()), n);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < tau.size(); ++j) {
        basis.raw_values(tau[j], row);
        for (Eigen::Index c = 0; c < n; ++c) out(static_cast<Eigen::Index>(j), c) = row[static_cast<std::size_t>(c)];
    }
    return out;
}

Eigen::MatrixXd eval_basis(const SplineBasis& basis, std::span<const double> tau) {
    check_in_domain(basis, tau);
    return eval_basis_extrapolated(basis, tau);
}

Eigen::MatrixXd eval_basis_extrapolated(const SplineBasis& basis, std::span<const double> tau) {
    const int d = basis.dim();
    const Interval dom = basis.domain();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tau.size()), d);
    std::vector<double> row(static_cast<std::size_t>(d) + 1);
    std::vector<double> slope(static_cast<std::size_t>(d) + 1);
    for (std::size_t j = 0; j < tau.size(); ++j) {
        const double x = tau[j];
        if (std::isnan(x)) throw DomainError("spline evaluation point is NaN");
        const double edge = std::clamp(x, dom.lo, dom.hi);
        basis.raw_values(edge, row);
        if (x != edge) {
            basis.raw_derivatives(edge, slope);
            for (std::size_t c = 0; c < row.size(); ++c) row[c] += slope[c] * (x - edge);
        }
        for (int c = 0; c < d; ++c) {
            out(static_cast<Eigen::Index>(j), c) =
                row[static_cast<std::size_t>(c) + 1] - basis.centering_offsets()[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

namespace {

std::vector<double> combine(const ParamCurve& curve, const Eigen::MatrixXd& design, std::size_t n) {
    std::vector<double> out(n, curve.intercept);
    if (!curve.basis) return out;
    if (curve.coeffs.size() != static_cast<std::size_t>(curve.basis->dim())) {
        throw ArgumentError("ParamCurve: coefficient count does not match basis dimension");
    }
    const Eigen::Map<const Eigen::VectorXd> beta(curve.coeffs.data(), static_cast<Eigen::Index>(curve.coeffs.size()));
    const Eigen::VectorXd values = design * beta;
    for (std::size_t j = 0; j < n; ++j) out[j] += values[static_cast<Eigen::Index>(j)];
    return out;
}

}  // namespace

std::vector<double> eval_curve(const ParamCurve& curve, std::span<const double> tau) {
    if (!curve.basis) return std::vector<double>(tau.size(), curve.intercept);
    return combine(curve, eval_basis(*curve.basis, tau), tau.size());
}

std::vector<double> eval_curve_extrapolated(const ParamCurve& curve, std::span<const double> tau) {
    if (!curve.basis) return std::vector<double>(tau.size(), curve.intercept);
    return combine(curve, eval_basis_extrapolated(*curve.basis, tau), tau.size());
}

ParamCurve fit_least_squares(std::shared_ptr<const SplineBasis> basis, std::span<const double> tau,
                             std::span<const double> y) {
    if (!basis) throw ArgumentError("fit_least_squares: basis is null");
    if (tau.size() != y.size()) throw ArgumentError("fit_least_squares: tau and y differ in length");
    const auto n = static_cast<Eigen::Index>(tau.size());
    const int d = basis->dim();
    Eigen::MatrixXd design(n, d + 1);
    design.col(0).setOnes();
    design.rightCols(d) = eval_basis(*basis, tau);
    const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), n);
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(rhs);
    ParamCurve curve;
    curve.intercept = beta[0];
    curve.coeffs.assign(beta.data() + 1, beta.data() + 1 + d);
    curve.basis = std::move(basis);
    return curve;
}

}  // namespace gevcast
