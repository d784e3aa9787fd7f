#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gevcast {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline constexpr int kMinBasisDim = 3;
inline constexpr int kMaxBasisDim = 10;

/// Grid-centred cubic B-spline basis of dimension d (3 <= d <= 10).
///
/// The underlying family is the d + 1 clamped cubic B-splines on equally
/// spaced knots over the domain. Those sum to one, so the first member is
/// dropped (the constant is carried by the separate intercept) and every
/// remaining member is shifted to have zero mean over the centring grid.
class SplineBasis {
public:
    Interval domain() const noexcept { return domain_; }
    int dim() const noexcept { return dim_; }
    /// Full clamped knot vector (d + 5 entries).
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& centering_offsets() const noexcept { return offsets_; }
    const std::vector<double>& centering_grid() const noexcept { return grid_; }

    /// Values of the d + 1 uncentred B-splines at x (clamped into the domain).
    void raw_values(double x, std::span<double> out) const;
    /// First derivatives of the d + 1 uncentred B-splines at x.
    void raw_derivatives(double x, std::span<double> out) const;

private:
    friend SplineBasis make_basis(Interval domain, int d, std::span<const double> centering_grid);

    Interval domain_;
    int dim_ = 0;
    std::vector<double> knots_;
    std::vector<double> offsets_;
    std::vector<double> grid_;
};

/// Throws ArgumentError if d is outside [3, 10], the domain is empty or the
/// centring grid is empty or leaves the domain.
SplineBasis make_basis(Interval domain, int d, std::span<const double> centering_grid);

/// |tau| x d matrix of centred basis values. Throws DomainError if any tau
/// lies outside the domain.
Eigen::MatrixXd eval_basis(const SplineBasis& basis, std::span<const double> tau);

/// |tau| x (d + 1) matrix of the uncentred B-splines (rows sum to one).
Eigen::MatrixXd eval_raw_basis(const SplineBasis& basis, std::span<const double> tau);

/// Like eval_basis, but points beyond either end of the domain are evaluated
/// by linear continuation from the boundary value and slope.
Eigen::MatrixXd eval_basis_extrapolated(const SplineBasis& basis, std::span<const double> tau);

/// eta(tau) = intercept + sum_i coeffs[i] * b_i(tau). A null basis means an
/// intercept-only (constant) curve.
struct ParamCurve {
    double intercept = 0.0;
    std::vector<double> coeffs;
    std::shared_ptr<const SplineBasis> basis;

    int dim() const noexcept { return basis ? basis->dim() : 0; }
};

std::vector<double> eval_curve(const ParamCurve& curve, std::span<const double> tau);
std::vector<double> eval_curve_extrapolated(const ParamCurve& curve, std::span<const double> tau);

/// Ordinary least-squares fit of intercept and coefficients to (tau, y).
ParamCurve fit_least_squares(std::shared_ptr<const SplineBasis> basis, std::span<const double> tau,
                             std::span<const double> y);

}  // namespace gevcast
