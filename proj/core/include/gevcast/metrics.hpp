#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gevcast/gev.hpp"

namespace gevcast {

/// Probability masses on a strictly increasing set of support points.
struct DensityGrid {
    std::vector<double> points;
    std::vector<double> masses;

    /// Throws ArgumentError unless points increase strictly, masses are
    /// nonnegative and sum to 1 within 1e-9.
    void validate() const;
};

inline constexpr std::size_t kDefaultDensityPoints = 512;
inline constexpr std::size_t kMinDensityPoints = 64;

/// Discretises two GEV densities on a shared uniform grid spanning the union
/// of their [0.001, 0.999] quantile ranges: mass_i = pdf(v_i) * spacing,
/// renormalised to one.
std::pair<DensityGrid, DensityGrid> make_density_grid(const GevParams& p, const GevParams& q,
                                                      std::size_t points = kDefaultDensityPoints);

/// Jensen-Shannon divergence with mixture (f + g) / 2; in [0, ln 2].
double jsd(const DensityGrid& f, const DensityGrid& g);

/// Symmetrised Kullback-Leibler divergence KL(f||g) + KL(g||f). Returns
/// +infinity when one grid has mass where the other has none, unless a
/// positive mass_floor is given, in which case masses are floored at it.
double kld(const DensityGrid& f, const DensityGrid& g, double mass_floor = 0.0);

struct DivergenceOptions {
    std::size_t points = kDefaultDensityPoints;
    double kld_mass_floor = 0.0;
};

/// Divergences of one forecast curve against the truth.
struct SampleDivergence {
    double jsd = 0.0;  // average over grid points
    double kld = 0.0;
    std::vector<double> per_point_jsd;
    std::vector<double> per_point_kld;
};

/// Per-tau JSD and KLD between truth and forecast parameter curves, averaged over tau.
SampleDivergence curve_divergence(std::span<const GevParams> truth, std::span<const GevParams> forecast,
                                  const DivergenceOptions& options = {});

struct WindowFailure {
    std::size_t window = 0;
    std::string message;
};

/// Divergences of one forecaster over its test samples.
struct DivergenceReport {
    std::string method;
    std::vector<SampleDivergence> samples;
    std::vector<WindowFailure> failures;
    double mean_jsd = 0.0;
    double mean_kld = 0.0;
};

/// Fills in the arithmetic means over samples.
DivergenceReport summarize(std::string method, std::vector<SampleDivergence> samples,
                           std::vector<WindowFailure> failures = {});

/// JSD between two curves treated as unnormalised densities on the index
/// grid: both are shifted by (joint minimum - 1e-6 * joint range) and
/// normalised to unit sum. Returns 0 when the joint range is zero.
double curve_jsd(std::span<const double> observed, std::span<const double> predicted);

}  // namespace gevcast
