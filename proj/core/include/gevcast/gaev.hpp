#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gevcast/gev.hpp"
#include "gevcast/series.hpp"
#include "gevcast/splines.hpp"

namespace gevcast {

/// Basis dimensions of the location, log-scale and shape functions.
/// Zero means intercept-only; any other value must lie in [3, 10].
struct GaevDims {
    int d_mu = 0;
    int d_sigma = 0;
    int d_xi = 0;

    /// Length of the stacked coefficient vector (intercepts included).
    int total_coefficients() const noexcept { return d_mu + d_sigma + d_xi + 3; }
    void validate() const;
    std::string to_string() const;

    friend auto operator<=>(const GaevDims&, const GaevDims&) = default;
};

/// Bases and design matrices of the GAEV model on one observation grid.
/// Shared by every yearly fit so that coefficients are comparable across years.
class GaevDesign {
public:
    /// The domain defaults to [grid.front(), grid.back()]; the bases are
    /// centred over the grid.
    GaevDesign(std::vector<double> grid, GaevDims dims, std::optional<Interval> domain = std::nullopt);

    const std::vector<double>& grid() const noexcept { return grid_; }
    GaevDims dims() const noexcept { return dims_; }
    Interval domain() const noexcept { return domain_; }

    const std::shared_ptr<const SplineBasis>& mu_basis() const noexcept { return mu_basis_; }
    const std::shared_ptr<const SplineBasis>& sigma_basis() const noexcept { return sigma_basis_; }
    const std::shared_ptr<const SplineBasis>& xi_basis() const noexcept { return xi_basis_; }

    /// J x (d + 1) matrices whose first column is the intercept.
    const Eigen::MatrixXd& mu_design() const noexcept { return mu_design_; }
    const Eigen::MatrixXd& sigma_design() const noexcept { return sigma_design_; }
    const Eigen::MatrixXd& xi_design() const noexcept { return xi_design_; }

private:
    std::vector<double> grid_;
    GaevDims dims_;
    Interval domain_;
    std::shared_ptr<const SplineBasis> mu_basis_, sigma_basis_, xi_basis_;
    Eigen::MatrixXd mu_design_, sigma_design_, xi_design_;
};

struct GaevFit {
    ParamCurve mu_curve;
    ParamCurve log_sigma_curve;
    ParamCurve xi_curve;
    double log_likelihood = 0.0;
    bool converged = false;

    /// [mu_0..mu_d, logsigma_0..logsigma_d, xi_0..xi_d].
    Eigen::VectorXd stacked() const;
    /// GEV parameters at each tau (inside the basis domain).
    std::vector<GevParams> params_at(std::span<const double> tau) const;
    /// Same, continuing the parameter functions linearly beyond the domain.
    std::vector<GevParams> params_at_extrapolated(std::span<const double> tau) const;
};

/// Rebuilds the three parameter curves from a stacked coefficient vector.
GaevFit gaev_from_stacked(const GaevDesign& design, const Eigen::VectorXd& stacked);

/// Ridge weight on non-intercept coefficients, for numerical conditioning only.
inline constexpr double kGaevRidge = 1e-8;
/// Box for the shape function at every grid point. With one observation per
/// grid point the likelihood is unbounded once the shape is free to grow
/// (the scale can collapse onto a single observation), so GAEV fits keep it
/// inside the region where maximum likelihood is regular.
inline constexpr double kGaevShapeLowerBound = -0.5;
inline constexpr double kGaevShapeUpperBound = 0.5;

/// Maximum-likelihood GAEV fit of one curve. The optimiser starts from the
/// supplied stacked vector when it is feasible, otherwise from a scalar GEV
/// fit of the pooled curve with all spline coefficients at zero.
/// Throws ArgumentError when the grid has fewer than total_coefficients + 5 points.
GaevFit fit_gaev(std::span<const double> curve, const GaevDesign& design,
                 const std::optional<Eigen::VectorXd>& init = std::nullopt);
GaevFit fit_gaev(std::span<const double> curve, std::span<const double> grid, GaevDims dims,
                 const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// {3,5,7,9} for location and scale; shape intercept-only unless free_xi.
std::vector<GaevDims> coarse_candidate_grid(bool free_xi = false);
/// {3..10} per dimension; 512 candidates when free_xi.
std::vector<GaevDims> full_candidate_grid(bool free_xi = false);

struct CvScore {
    GaevDims dims;
    double score;       // NaN when the candidate failed
    std::string error;  // failure reason, empty on success
};

struct CvResult {
    GaevDims selected;
    std::vector<CvScore> scores;  // in candidate order
};

/// Lowest score; ties go to the smaller total coefficient count, then to the
/// lexicographically smaller dims. Failed (NaN) scores are skipped; throws
/// FitError listing the failures when nothing is left.
GaevDims best_candidate(std::span<const CvScore> scores);

/// Leave-last-out selection: for every candidate, forecast curve T from
/// curves 1..T-1 with fGAEVM, take the median curve and score it against
/// the held-out curve with curve_jsd. Ties go to the smaller total
/// coefficient count, then to the lexicographically smaller dims.
CvResult cross_validate(const FunctionalSeries& series, std::span<const GaevDims> candidates, int max_var_order = 5);
GaevDims select_dims(const FunctionalSeries& series, std::span<const GaevDims> candidates, int max_var_order = 5);

}  // namespace gevcast
