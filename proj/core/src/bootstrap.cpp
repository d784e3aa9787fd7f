#include "gevcast/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gevcast/error.hpp"
#include "gevcast/parallel.hpp"
#include "gevcast/random.hpp"

namespace gevcast {

namespace {

constexpr int kMaxRedraws = 20;

void check_band_inputs(const Eigen::MatrixXd& curves, std::span<const double> grid, double level) {
    if (curves.rows() < kMinBootstrapReplicates) {
        throw ArgumentError("bootstrap band: need at least 50 curves, got " + std::to_string(curves.rows()));
    }
    if (static_cast<std::size_t>(curves.cols()) != grid.size()) {
        throw ArgumentError("bootstrap band: curve length does not match the grid");
    }
    if (!(level > 0.0 && level < 1.0)) {
        std::ostringstream msg;
        msg << "bootstrap band: level must lie in (0, 1), got " << level;
        throw ArgumentError(msg.str());
    }
}

}  // namespace

double empirical_quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw ArgumentError("empirical_quantile: no values");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

IntervalBand pointwise_interval(const Eigen::MatrixXd& curves, std::span<const double> grid, double level) {
    check_band_inputs(curves, grid, level);
    IntervalBand band;
    band.grid.assign(grid.begin(), grid.end());
    band.level = level;
    band.kind = BandKind::pointwise;
    band.replicates = static_cast<int>(curves.rows());
    const double tail = (1.0 - level) / 2.0;
    std::vector<double> column(static_cast<std::size_t>(curves.rows()));
    for (Eigen::Index j = 0; j < curves.cols(); ++j) {
        for (Eigen::Index b = 0; b < curves.rows(); ++b) column[static_cast<std::size_t>(b)] = curves(b, j);
        band.lower.push_back(empirical_quantile(column, tail));
        band.upper.push_back(empirical_quantile(column, 1.0 - tail));
    }
    return band;
}

IntervalBand simultaneous_band(const Eigen::MatrixXd& curves, std::span<const double> grid, double level) {
    check_band_inputs(curves, grid, level);
    const Eigen::Index n_curves = curves.rows();
    const Eigen::RowVectorXd mean = curves.colwise().mean();
    const Eigen::RowVectorXd sd =
        ((curves.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n_curves - 1)).sqrt();

    std::vector<double> stat(static_cast<std::size_t>(n_curves), 0.0);
    for (Eigen::Index b = 0; b < n_curves; ++b) {
        for (Eigen::Index j = 0; j < curves.cols(); ++j) {
            if (sd[j] > 0.0) stat[static_cast<std::size_t>(b)] = std::max(stat[static_cast<std::size_t>(b)], std::abs(curves(b, j) - mean[j]) / sd[j]);
        }
    }
    std::sort(stat.begin(), stat.end());
    const auto needed = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n_curves) - 1e-9));
    double c = stat[std::max<std::size_t>(needed, 1) - 1];

    const IntervalBand pointwise = pointwise_interval(curves, grid, level);
    for (Eigen::Index j = 0; j < curves.cols(); ++j) {
        if (sd[j] <= 0.0) continue;
        const auto jj = static_cast<std::size_t>(j);
        c = std::max({c, (pointwise.upper[jj] - mean[j]) / sd[j], (mean[j] - pointwise.lower[jj]) / sd[j]});
    }
    c *= 1.0 + 1e-12;

    IntervalBand band;
    band.grid.assign(grid.begin(), grid.end());
    band.level = level;
    band.kind = BandKind::simultaneous;
    band.replicates = static_cast<int>(n_curves);
    for (Eigen::Index j = 0; j < curves.cols(); ++j) {
        const double half = sd[j] > 0.0 ? c * sd[j] : 0.0;
        band.lower.push_back(mean[j] - half);
        band.upper.push_back(mean[j] + half);
    }
    return band;
}

int curves_inside(const Eigen::MatrixXd& curves, const IntervalBand& band) {
    int inside = 0;
    for (Eigen::Index b = 0; b < curves.rows(); ++b) {
        bool ok = true;
        for (Eigen::Index j = 0; j < curves.cols() && ok; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            ok = curves(b, j) >= band.lower[jj] && curves(b, j) <= band.upper[jj];
        }
        inside += ok ? 1 : 0;
    }
    return inside;
}

BootstrapForecasts sieve_bootstrap_from_fits(std::span<const GaevFit> fits, const GaevDesign& design, double prob,
                                             int replicates, std::uint64_t seed, const BootstrapOptions& options) {
    if (replicates < kMinBootstrapReplicates) {
        throw ArgumentError("sieve bootstrap: need at least 50 replicates, got " + std::to_string(replicates));
    }
    if (options.forecast.difference) throw ArgumentError("sieve bootstrap: differenced VAR is not supported");
    if (fits.size() < 10) throw ArgumentError("sieve bootstrap: need at least 10 curves");

    const auto t = static_cast<Eigen::Index>(fits.size());
    const auto k = static_cast<Eigen::Index>(design.dims().total_coefficients());
    Eigen::MatrixXd observed(t, k);
    for (Eigen::Index i = 0; i < t; ++i) observed.row(i) = fits[static_cast<std::size_t>(i)].stacked();

    BootstrapForecasts out;
    out.grid = design.grid();
    out.var = fit_var(observed, options.forecast.max_order);
    const VarModel& model = out.var;
    const Eigen::VectorXd point = forecast_var(model, observed, 1).row(0).transpose();
    out.point = quantile_curve(ForecastDensity{1, out.grid, params_from_stacked(design, point)}, prob);

    const Eigen::MatrixXd resid = model.residuals.rowwise() - model.residuals.colwise().mean();
    const auto n_resid = static_cast<std::size_t>(resid.rows());
    const int order = model.order;
    const auto j_points = static_cast<Eigen::Index>(out.grid.size());
    out.curves.resize(replicates, j_points);

    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::string last_error;
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
            try {
                Eigen::MatrixXd lags(order, k);  // row 0 = most recent
                for (int i = 0; i < order; ++i) lags.row(i) = observed.row(order - 1 - i);
                Eigen::MatrixXd path(t, k);
                const Eigen::Index total = options.burn_in + t;
                for (Eigen::Index s = 0; s < total; ++s) {
                    Eigen::VectorXd next = model.intercept + resid.row(static_cast<Eigen::Index>(rng.index(n_resid))).transpose();
                    for (int i = 0; i < order; ++i) next += model.coeff_mats[static_cast<std::size_t>(i)] * lags.row(i).transpose();
                    for (int i = order - 1; i > 0; --i) lags.row(i) = lags.row(i - 1);
                    lags.row(0) = next.transpose();
                    if (s >= options.burn_in) path.row(s - options.burn_in) = next.transpose();
                }
                const VarModel refit = fit_var(path, options.forecast.max_order);
                const Eigen::VectorXd draw = forecast_var(refit, observed, 1).row(0).transpose() +
                                             resid.row(static_cast<Eigen::Index>(rng.index(n_resid))).transpose();
                const std::vector<double> curve =
                    quantile_curve(ForecastDensity{1, out.grid, params_from_stacked(design, draw)}, prob);
                for (Eigen::Index j = 0; j < j_points; ++j) out.curves(static_cast<Eigen::Index>(b), j) = curve[static_cast<std::size_t>(j)];
                return;
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        throw FitError("sieve bootstrap replicate " + std::to_string(b) + " failed " + std::to_string(kMaxRedraws) +
                       " times: " + last_error);
    });
    return out;
}

BootstrapForecasts sieve_bootstrap_forecasts(const FunctionalSeries& series, GaevDims dims, double prob, int replicates,
                                             std::uint64_t seed, const BootstrapOptions& options) {
    if (replicates < kMinBootstrapReplicates) {
        throw ArgumentError("sieve bootstrap: need at least 50 replicates, got " + std::to_string(replicates));
    }
    const GaevDesign design(series.grid, dims);
    const std::vector<GaevFit> fits = fit_years_gaev(series, design);
    return sieve_bootstrap_from_fits(fits, design, prob, replicates, seed, options);
}

}  // namespace gevcast
