#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gevcast/forecast.hpp"
#include "gevcast/gaev.hpp"
#include "gevcast/series.hpp"

namespace gevcast {

enum class BandKind { pointwise, simultaneous };

struct IntervalBand {
    std::vector<double> grid;
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 0.95;
    BandKind kind = BandKind::pointwise;
    int replicates = 0;
};

inline constexpr int kMinBootstrapReplicates = 50;

struct BootstrapOptions {
    int burn_in = 50;
    ForecastOptions forecast;
};

struct BootstrapForecasts {
    std::vector<double> grid;
    std::vector<double> point;  // quantile curve of the fGAEVM point forecast
    Eigen::MatrixXd curves;     // B x J bootstrap quantile curves
    VarModel var;               // model fitted to the observed coefficients
};

/// Sieve bootstrap of the one-step fGAEVM quantile curve at `prob`.
///
/// The yearly GAEV coefficients are fitted once and a VAR is fitted to them.
/// Each replicate regenerates a coefficient path by resampling centred VAR
/// residuals (after `burn_in` discarded steps), refits the VAR to that path,
/// forecasts one step from the observed coefficients and adds one more
/// resampled residual. Replicate b draws from its own stream derived from
/// (seed, b), so the output is identical for any thread count.
BootstrapForecasts sieve_bootstrap_forecasts(const FunctionalSeries& series, GaevDims dims, double prob, int replicates,
                                             std::uint64_t seed, const BootstrapOptions& options = {});

/// Same procedure on precomputed yearly fits.
BootstrapForecasts sieve_bootstrap_from_fits(std::span<const GaevFit> fits, const GaevDesign& design, double prob,
                                             int replicates, std::uint64_t seed,
                                             const BootstrapOptions& options = {});

/// Empirical type-7 quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double prob);

/// Per-tau (1 - level) / 2 and (1 + level) / 2 empirical quantiles.
IntervalBand pointwise_interval(const Eigen::MatrixXd& curves, std::span<const double> grid, double level);

/// Band m(tau) +/- c s(tau) from the pointwise mean and standard deviation.
/// c is the smallest value such that ceil(level * B) curves lie entirely
/// inside, raised if necessary so that the band also covers the pointwise
/// interval at the same level. Where s(tau) = 0 the band collapses to m(tau).
IntervalBand simultaneous_band(const Eigen::MatrixXd& curves, std::span<const double> grid, double level);

/// Number of curves lying inside the band at every grid point.
int curves_inside(const Eigen::MatrixXd& curves, const IntervalBand& band);

}  // namespace gevcast
