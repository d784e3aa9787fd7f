#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gevcast/gaev.hpp"
#include "gevcast/gev.hpp"
#include "gevcast/metrics.hpp"
#include "gevcast/series.hpp"

namespace gevcast {

/// Data-generating process of the simulation study.
///   setting 1: mu_t, ln sigma_t, xi_t scalar AR(1) processes;
///   setting 2: spline coefficients of mu and ln sigma follow AR(1), xi_t scalar AR(1);
///   setting 3: all three parameters functional.
struct DgpSpec {
    int setting = 1;
    int T = 50;
    int J = 30;
    int d = 5;
    std::pair<double, double> ar_bounds{-0.8, 0.8};
    double innovation_sd = 0.3;
    std::pair<double, double> xi_clamp{-0.4, 0.4};
    // Means of the AR(1) processes: intercepts and spline coefficients.
    double mu_mean = 0.0;
    double log_sigma_mean = 0.0;
    double xi_mean = 0.1;
    double coefficient_mean = 0.0;
    // Each spline coefficient's mean is shifted by a Uniform(-spread, spread) draw.
    double coefficient_spread = 2.0;
    std::uint64_t seed = 1;

    /// Throws ArgumentError for an invalid specification.
    void validate() const;
    /// Dimensions of the generating model (d_xi = 0 unless setting 3).
    GaevDims true_dims() const;
};

using ParamMatrix = std::vector<std::vector<GevParams>>;  // [t][j]

struct SimTruth {
    DgpSpec spec;
    FunctionalSeries series;  // grid tau_j = (j - 1) / (J - 1)
    ParamMatrix truth;        // generating parameters of every observation
};

SimTruth generate(const DgpSpec& spec);

/// One-step forecaster: given the first n curves, returns the predicted
/// parameters of curve n + 1 on the series grid.
using WindowForecaster = std::function<std::vector<GevParams>(const FunctionalSeries& train)>;

struct NamedForecaster {
    std::string name;
    WindowForecaster forecast;
};

struct ForecasterOptions {
    /// Basis dimensions for tsGAEVM and fGAEVM; chosen by cross-validation
    /// on the first training window when unset.
    std::optional<GaevDims> dims;
    bool free_xi_cv = false;
    int max_var_order = 5;
};

/// fGEV, tsGAEVM and fGAEVM, in that order. The forecasters cache yearly
/// fits, so each set must only be applied to prefixes of a single series.
std::vector<NamedForecaster> make_standard_forecasters(const ForecasterOptions& options = {});

/// Expanding-window evaluation: the last N = ceil(test_fraction * T) curves
/// are forecast one step ahead from all curves before them and scored with
/// curve_divergence against the true parameters. Window failures are
/// recorded; more than 30% failures throws FitError.
std::vector<DivergenceReport> expanding_window_eval(const SimTruth& truth, std::span<const NamedForecaster> forecasters,
                                                    double test_fraction = 0.2,
                                                    const DivergenceOptions& divergence = {});

struct MonteCarloOptions {
    double test_fraction = 0.2;
    DivergenceOptions divergence{kDefaultDensityPoints, 1e-10};
    ForecasterOptions forecasters;
    /// Use truth dims for tsGAEVM and fGAEVM instead of cross-validation.
    bool oracle_dims = false;
    /// Give every replicate the master seed (for determinism checks).
    bool same_seed = false;
};

struct SummaryRow {
    int setting = 0;
    std::string method;
    std::string metric;  // "jsd" or "kld"
    double mean = 0.0;
    double sd = 0.0;
    int reps = 0;  // completed replicates the statistics are based on
};

struct ReplicateDetail {
    int rep = 0;
    std::uint64_t seed = 0;
    std::string method;
    double jsd = 0.0;
    double kld = 0.0;
    int failed_windows = 0;
};

struct ReplicateFailure {
    int rep = 0;
    std::string message;
};

struct MonteCarloResult {
    std::vector<SummaryRow> summary;
    std::vector<ReplicateDetail> details;
    std::vector<ReplicateFailure> failures;
};

/// Runs `reps` independently seeded generate + evaluate replicates in
/// parallel. Replicate r uses derive_seed(spec.seed, r). The summary holds
/// mean and sample standard deviation per method and metric over the
/// completed replicates.
MonteCarloResult monte_carlo(const DgpSpec& spec, int reps, const MonteCarloOptions& options = {});

}  // namespace gevcast
