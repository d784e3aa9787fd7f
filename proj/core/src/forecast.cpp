#include "gevcast/forecast.hpp"

#include <cmath>
#include <sstream>

#include "gevcast/error.hpp"
#include "gevcast/parallel.hpp"

namespace gevcast {

double boxcox(double y, double lambda) {
    if (!(y > 0.0)) {
        std::ostringstream msg;
        msg << "boxcox: input must be positive, got " << y;
        throw DomainError(msg.str());
    }
    if (lambda == 0.0) return std::log(y);
    return std::expm1(lambda * std::log(y)) / lambda;
}

double inv_boxcox(double z, double lambda) {
    if (lambda == 0.0) return std::exp(z);
    const double base = 1.0 + lambda * z;
    if (!(base > 0.0)) throw DomainError("inv_boxcox: value outside the range of the transform");
    return std::exp(std::log1p(lambda * z) / lambda);
}

Eigen::MatrixXd forecast_latent(const Eigen::MatrixXd& series, int h, const ForecastOptions& options,
                                VarModel* model) {
    if (h < 1) throw ArgumentError("forecast: horizon must be at least 1");
    if (!options.difference) {
        VarModel m = fit_var(series, options.max_order);
        Eigen::MatrixXd out = forecast_var(m, series, h);
        if (model) *model = std::move(m);
        return out;
    }
    const Eigen::Index t = series.rows();
    if (t < 5) throw ArgumentError("forecast: differencing needs at least 5 observations");
    const Eigen::MatrixXd diffs = series.bottomRows(t - 1) - series.topRows(t - 1);
    VarModel m = fit_var(diffs, options.max_order);
    Eigen::MatrixXd out = forecast_var(m, diffs, h);
    Eigen::RowVectorXd level = series.row(t - 1);
    for (Eigen::Index s = 0; s < out.rows(); ++s) {
        level += out.row(s);
        out.row(s) = level;
    }
    if (model) *model = std::move(m);
    return out;
}

std::vector<std::optional<GevFitResult>> fit_years_gev(const FunctionalSeries& series) {
    series.validate();
    std::vector<std::optional<GevFitResult>> fits(series.size());
    parallel_for(series.size(), [&](std::size_t t) {
        const std::vector<double> curve = series.curve(t);
        try {
            GevFitResult fit = fit_mle(curve);
            if (std::isfinite(fit.log_likelihood)) fits[t] = fit;
        } catch (const DegenerateDataError&) {
            // stays nullopt; imputed by the caller
        }
    });
    return fits;
}

FgevForecast fgev_from_fits(std::span<const std::optional<GevFitResult>> fits, std::span<const double> grid, int h,
                            const ForecastOptions& options) {
    const std::size_t t = fits.size();
    if (t < 10) throw ArgumentError("forecast_fgev: need at least 10 curves, got " + std::to_string(t));

    FgevForecast out;
    std::size_t first_valid = t;
    for (std::size_t i = 0; i < t; ++i) {
        if (fits[i]) {
            first_valid = std::min(first_valid, i);
        } else {
            out.imputed_years.push_back(i);
        }
    }
    if (static_cast<double>(out.imputed_years.size()) > 0.2 * static_cast<double>(t)) {
        throw DegenerateDataError("forecast_fgev: " + std::to_string(out.imputed_years.size()) + " of " +
                                  std::to_string(t) + " yearly fits are degenerate (limit 20%)");
    }

    out.theta.resize(static_cast<Eigen::Index>(t), 3);
    const GevParams* last = &fits[first_valid]->params;
    for (std::size_t i = 0; i < t; ++i) {
        if (fits[i]) last = &fits[i]->params;
        const auto r = static_cast<Eigen::Index>(i);
        out.theta(r, 0) = last->mu();
        out.theta(r, 1) = boxcox(last->sigma(), 0.0);
        out.theta(r, 2) = last->xi();
    }

    const Eigen::MatrixXd ahead = forecast_latent(out.theta, h, options, &out.var);
    const Eigen::RowVectorXd target = ahead.row(h - 1);
    const GevParams predicted(target[0], inv_boxcox(target[1], 0.0), target[2]);
    out.density.horizon = h;
    out.density.grid.assign(grid.begin(), grid.end());
    out.density.params.assign(grid.size(), predicted);
    return out;
}

ForecastDensity forecast_fgev(const FunctionalSeries& series, int h, const ForecastOptions& options) {
    if (series.size() < 10) throw ArgumentError("forecast_fgev: need at least 10 curves");
    const auto fits = fit_years_gev(series);
    return fgev_from_fits(fits, series.grid, h, options).density;
}

std::vector<GaevFit> fit_years_gaev(const FunctionalSeries& series, const GaevDesign& design) {
    series.validate();
    if (series.grid != design.grid()) throw ArgumentError("fit_years_gaev: series grid does not match the design");
    std::vector<std::optional<GaevFit>> slots(series.size());
    parallel_for(series.size(), [&](std::size_t t) { slots[t] = fit_gaev(series.curve(t), design); });
    std::vector<GaevFit> fits;
    fits.reserve(slots.size());
    for (auto& s : slots) fits.push_back(std::move(*s));
    return fits;
}

std::vector<GevParams> params_from_stacked(const GaevDesign& design, const Eigen::VectorXd& stacked) {
    const GaevFit fit = gaev_from_stacked(design, stacked);
    try {
        return fit.params_at(design.grid());
    } catch (const ArgumentError& e) {
        throw FitError(std::string("forecast produced invalid GEV parameters: ") + e.what());
    }
}

FgaevmForecast fgaevm_from_fits(std::span<const GaevFit> fits, const GaevDesign& design, int h,
                                const ForecastOptions& options) {
    const std::size_t t = fits.size();
    if (t < 10) throw ArgumentError("forecast_fgaevm: need at least 10 curves, got " + std::to_string(t));
    const auto k = static_cast<Eigen::Index>(design.dims().total_coefficients());

    FgaevmForecast out;
    out.coefficients.resize(static_cast<Eigen::Index>(t), k);
    for (std::size_t i = 0; i < t; ++i) out.coefficients.row(static_cast<Eigen::Index>(i)) = fits[i].stacked();

    const Eigen::MatrixXd ahead = forecast_latent(out.coefficients, h, options, &out.var);
    out.forecast_stacked = ahead.row(h - 1).transpose();
    out.density.horizon = h;
    out.density.grid = design.grid();
    out.density.params = params_from_stacked(design, out.forecast_stacked);
    return out;
}

ForecastDensity forecast_fgaevm(const FunctionalSeries& series, GaevDims dims, int h, const ForecastOptions& options) {
    if (series.size() < 10) throw ArgumentError("forecast_fgaevm: need at least 10 curves");
    const GaevDesign design(series.grid, dims);
    const std::vector<GaevFit> fits = fit_years_gaev(series, design);
    return fgaevm_from_fits(fits, design, h, options).density;
}

std::vector<double> tsgaevm_positions(std::size_t points) {
    std::vector<double> s(points);
    for (std::size_t j = 0; j < points; ++j) s[j] = static_cast<double>(j + 1) / static_cast<double>(points);
    return s;
}

ForecastDensity forecast_tsgaevm(std::span<const double> last_curve, std::span<const double> grid, GaevDims dims,
                                 int steps) {
    if (steps < 1) throw ArgumentError("forecast_tsgaevm: steps must be at least 1");
    if (last_curve.size() != grid.size()) throw ArgumentError("forecast_tsgaevm: curve and grid differ in length");
    if (static_cast<std::size_t>(steps) > grid.size()) {
        throw ArgumentError("forecast_tsgaevm: steps cannot exceed the curve length");
    }
    const std::size_t n = last_curve.size();
    const GaevDesign design(tsgaevm_positions(n), dims, Interval{0.0, 1.0});
    const GaevFit fit = fit_gaev(last_curve, design);

    std::vector<double> ahead(static_cast<std::size_t>(steps));
    for (std::size_t j = 0; j < ahead.size(); ++j) ahead[j] = 1.0 + static_cast<double>(j + 1) / static_cast<double>(n);

    ForecastDensity out;
    out.horizon = 1;
    out.grid.assign(grid.begin(), grid.begin() + steps);
    try {
        out.params = fit.params_at_extrapolated(ahead);
    } catch (const ArgumentError& e) {
        throw FitError(std::string("tsGAEVM extrapolation produced invalid GEV parameters: ") + e.what());
    }
    return out;
}

std::vector<double> quantile_curve(const ForecastDensity& fd, double prob) {
    std::vector<double> out(fd.params.size());
    for (std::size_t j = 0; j < fd.params.size(); ++j) {
        try {
            out[j] = quantile(fd.params[j], prob);
        } catch (const DomainError& e) {
            throw DomainError("quantile_curve at tau index " + std::to_string(j) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace gevcast
