#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace gevcast {

/// Shape values with |xi| below this threshold use the Gumbel (xi = 0) formulas.
inline constexpr double kGumbelThreshold = 1e-8;

/// Admissible shape range during likelihood maximisation.
inline constexpr double kShapeLowerBound = -0.9;
inline constexpr double kShapeUpperBound = 5.0;

/// Location, scale and shape of one generalized extreme value distribution.
class GevParams {
public:
    /// Throws ArgumentError unless sigma > 0 and all three values are finite.
    GevParams(double mu, double sigma, double xi);

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    double xi() const noexcept { return xi_; }

    bool is_gumbel() const noexcept;

    /// True when xi is treated as zero or 1 + xi (x - mu) / sigma > 0.
    bool in_support(double x) const noexcept;

    friend bool operator==(const GevParams&, const GevParams&) = default;

private:
    double mu_;
    double sigma_;
    double xi_;
};

double pdf(const GevParams& p, double x) noexcept;
double cdf(const GevParams& p, double x) noexcept;

/// Inverse CDF. Valid probabilities: (0, 1) for the Gumbel branch, [0, 1)
/// for xi > 0 and (0, 1] for xi < 0; anything else throws DomainError.
double quantile(const GevParams& p, double prob);

/// Sum of log densities. Returns -infinity if any observation lies outside
/// the support. Throws ArgumentError on empty data.
double log_likelihood(const GevParams& p, std::span<const double> data);

struct GevFitResult {
    GevParams params;
    double log_likelihood;
    bool converged;
    std::size_t n_obs;
};

/// Gumbel moment estimates for (mu, sigma) with xi = 0.1.
GevParams moment_initializer(std::span<const double> data);

/// Maximum-likelihood fit in (mu, log sigma, xi). Requires at least 10
/// observations (ArgumentError) that are not all identical
/// (DegenerateDataError). converged is false when the optimiser hit its
/// limits or the shape estimate falls below -0.5, where the MLE is irregular.
GevFitResult fit_mle(std::span<const double> data, std::optional<GevParams> init = std::nullopt);

namespace detail {

/// Log density and its gradient with respect to (mu, log sigma, xi).
/// Returns -infinity (gradient untouched) outside the support.
double log_pdf_with_gradient(double x, double mu, double log_sigma, double xi,
                             double grad[3]) noexcept;

}  // namespace detail

}  // namespace gevcast
