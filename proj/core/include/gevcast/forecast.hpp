#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gevcast/gaev.hpp"
#include "gevcast/gev.hpp"
#include "gevcast/series.hpp"
#include "gevcast/var.hpp"

namespace gevcast {

/// (y^lambda - 1) / lambda, or ln y when lambda == 0. Throws DomainError for y <= 0.
double boxcox(double y, double lambda);
double inv_boxcox(double z, double lambda);

/// Predicted GEV parameters at each grid point, h years ahead.
struct ForecastDensity {
    int horizon = 1;
    std::vector<double> grid;
    std::vector<GevParams> params;
};

struct ForecastOptions {
    int max_order = 5;
    /// Fit the VAR to first differences and integrate the forecasts back.
    bool difference = false;
};

/// Forecasts a T x k latent series h steps ahead (honouring options.difference);
/// returns h x k and optionally the fitted model.
Eigen::MatrixXd forecast_latent(const Eigen::MatrixXd& series, int h, const ForecastOptions& options,
                                VarModel* model = nullptr);

// fGEV: scalar GEV per year, VAR on (mu, ln sigma, xi).

/// Per-year scalar MLE fits; std::nullopt marks a degenerate year.
std::vector<std::optional<GevFitResult>> fit_years_gev(const FunctionalSeries& series);

struct FgevForecast {
    ForecastDensity density;
    VarModel var;
    Eigen::MatrixXd theta;                    // T x 3 transformed parameters used for the VAR
    std::vector<std::size_t> imputed_years;  // indices carried over from a neighbour
};

/// Steps 2-6 of the fGEV pipeline on precomputed yearly fits. Throws
/// DegenerateDataError if more than 20% of the years are degenerate.
FgevForecast fgev_from_fits(std::span<const std::optional<GevFitResult>> fits, std::span<const double> grid,
                            int h, const ForecastOptions& options = {});
ForecastDensity forecast_fgev(const FunctionalSeries& series, int h, const ForecastOptions& options = {});

// fGAEVM: GAEV per year, VAR on the stacked basis coefficients.

std::vector<GaevFit> fit_years_gaev(const FunctionalSeries& series, const GaevDesign& design);

struct FgaevmForecast {
    ForecastDensity density;
    VarModel var;
    Eigen::MatrixXd coefficients;       // T x K stacked coefficients
    Eigen::VectorXd forecast_stacked;  // K
};

FgaevmForecast fgaevm_from_fits(std::span<const GaevFit> fits, const GaevDesign& design, int h,
                                const ForecastOptions& options = {});
ForecastDensity forecast_fgaevm(const FunctionalSeries& series, GaevDims dims, int h,
                                const ForecastOptions& options = {});

/// Maps a stacked coefficient vector to per-grid-point GEV parameters.
std::vector<GevParams> params_from_stacked(const GaevDesign& design, const Eigen::VectorXd& stacked);

// tsGAEVM: GAEV on the last curve alone, extrapolated into the next year.

/// Within-curve positions j / J, j = 1..J, used by tsGAEVM.
std::vector<double> tsgaevm_positions(std::size_t points);

/// Fits the GAEV model on the last curve with covariate s = j / J in (0, 1]
/// and evaluates the parameter functions at s = 1 + j / J for the first
/// `steps` points, continuing them linearly beyond s = 1. The output grid is
/// grid[0 .. steps).
ForecastDensity forecast_tsgaevm(std::span<const double> last_curve, std::span<const double> grid, GaevDims dims,
                                 int steps);

/// Pointwise GEV quantile. DomainError messages name the offending grid index.
std::vector<double> quantile_curve(const ForecastDensity& fd, double prob);

}  // namespace gevcast
