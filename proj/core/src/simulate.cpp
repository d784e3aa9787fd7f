#include "gevcast/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "gevcast/error.hpp"
#include "gevcast/forecast.hpp"
#include "gevcast/parallel.hpp"
#include "gevcast/random.hpp"

namespace gevcast {

void DgpSpec::validate() const {
    if (setting < 1 || setting > 3) throw ArgumentError("DgpSpec: setting must be 1, 2 or 3");
    if (T < 2) throw ArgumentError("DgpSpec: T must be at least 2");
    if (J < 2) throw ArgumentError("DgpSpec: J must be at least 2");
    if (setting > 1 && (d < kMinBasisDim || d > kMaxBasisDim)) {
        throw ArgumentError("DgpSpec: d must lie in [3, 10]");
    }
    const auto [ar_lo, ar_hi] = ar_bounds;
    if (!(ar_lo <= ar_hi) || !(std::abs(ar_lo) < 1.0) || !(std::abs(ar_hi) < 1.0)) {
        throw ArgumentError("DgpSpec: AR bounds must satisfy -1 < lo <= hi < 1");
    }
    if (!(innovation_sd >= 0.0) || !std::isfinite(innovation_sd)) {
        throw ArgumentError("DgpSpec: innovation_sd must be finite and nonnegative");
    }
    const auto [xi_lo, xi_hi] = xi_clamp;
    if (!(xi_lo <= xi_hi) || !(xi_lo > -0.5) || !(xi_hi < 0.5)) {
        throw ArgumentError("DgpSpec: xi clamp must lie inside (-0.5, 0.5)");
    }
    if (!(coefficient_spread >= 0.0)) throw ArgumentError("DgpSpec: coefficient_spread must be nonnegative");
    for (double m : {mu_mean, log_sigma_mean, xi_mean, coefficient_mean, coefficient_spread}) {
        if (!std::isfinite(m)) throw ArgumentError("DgpSpec: process means must be finite");
    }
}

GaevDims DgpSpec::true_dims() const {
    switch (setting) {
        case 1: return {0, 0, 0};
        case 2: return {d, d, 0};
        default: return {d, d, d};
    }
}

namespace {

// T draws of a stationary AR(1) with the given mean, started from its
// stationary distribution.
std::vector<double> ar1_path(Rng& rng, const DgpSpec& spec, double mean) {
    const double phi = spec.ar_bounds.first == spec.ar_bounds.second
                           ? spec.ar_bounds.first
                           : rng.uniform(spec.ar_bounds.first, spec.ar_bounds.second);
    const double sd = spec.innovation_sd;
    std::vector<double> path(static_cast<std::size_t>(spec.T));
    double x = mean + rng.normal(0.0, sd / std::sqrt(1.0 - phi * phi));
    for (auto& v : path) {
        v = x;
        x = mean + phi * (x - mean) + rng.normal(0.0, sd);
    }
    return path;
}

// T x (d + 1) coefficient paths: intercept with `intercept_mean`, the rest
// with coefficient_mean.
Eigen::MatrixXd coefficient_paths(Rng& rng, const DgpSpec& spec, int d, double intercept_mean) {
    Eigen::MatrixXd out(spec.T, d + 1);
    for (int k = 0; k <= d; ++k) {
        double mean = intercept_mean;
        if (k > 0) {
            mean = spec.coefficient_mean;
            if (spec.coefficient_spread > 0.0) mean += rng.uniform(-spec.coefficient_spread, spec.coefficient_spread);
        }
        const auto path = ar1_path(rng, spec, mean);
        for (int t = 0; t < spec.T; ++t) out(t, k) = path[static_cast<std::size_t>(t)];
    }
    return out;
}

}  // namespace

SimTruth generate(const DgpSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto t_count = static_cast<std::size_t>(spec.T);
    const auto j_count = static_cast<std::size_t>(spec.J);

    std::vector<double> grid(j_count);
    for (std::size_t j = 0; j < j_count; ++j) grid[j] = static_cast<double>(j) / static_cast<double>(j_count - 1);

    // mu, ln sigma and xi at every (t, j).
    Eigen::MatrixXd mu(spec.T, spec.J), log_sigma(spec.T, spec.J), xi(spec.T, spec.J);
    const auto scalar = [&](double mean) {
        const auto path = ar1_path(rng, spec, mean);
        Eigen::MatrixXd m(spec.T, spec.J);
        for (int t = 0; t < spec.T; ++t) m.row(t).setConstant(path[static_cast<std::size_t>(t)]);
        return m;
    };
    if (spec.setting == 1) {
        mu = scalar(spec.mu_mean);
        log_sigma = scalar(spec.log_sigma_mean);
        xi = scalar(spec.xi_mean);
    } else {
        const GaevDesign design(grid, spec.true_dims());
        mu = coefficient_paths(rng, spec, spec.d, spec.mu_mean) * design.mu_design().transpose();
        log_sigma = coefficient_paths(rng, spec, spec.d, spec.log_sigma_mean) * design.sigma_design().transpose();
        if (spec.setting == 2) {
            xi = scalar(spec.xi_mean);
        } else {
            xi = coefficient_paths(rng, spec, spec.d, spec.xi_mean) * design.xi_design().transpose();
        }
    }
    xi = xi.cwiseMax(spec.xi_clamp.first).cwiseMin(spec.xi_clamp.second);

    SimTruth out;
    out.spec = spec;
    out.truth.assign(t_count, {});
    Eigen::MatrixXd values(spec.T, spec.J);
    for (int t = 0; t < spec.T; ++t) {
        auto& row = out.truth[static_cast<std::size_t>(t)];
        row.reserve(j_count);
        for (int j = 0; j < spec.J; ++j) {
            row.emplace_back(mu(t, j), std::exp(log_sigma(t, j)), xi(t, j));
            values(t, j) = quantile(row.back(), rng.uniform_open());
        }
    }
    std::vector<int> years(t_count);
    for (std::size_t t = 0; t < t_count; ++t) years[t] = static_cast<int>(t + 1);
    out.series = FunctionalSeries::from_values(std::move(years), std::move(grid), std::move(values));
    return out;
}

// Forecasters

namespace {

// Yearly fits shared by the standard forecasters of one series.
struct FitCache {
    ForecasterOptions options;
    Eigen::MatrixXd seen;  // curves fitted so far, to detect misuse
    std::vector<std::optional<GevFitResult>> gev;
    std::optional<GaevDims> dims;
    std::unique_ptr<GaevDesign> design;
    std::vector<GaevFit> gaev;

    void check_prefix(const FunctionalSeries& train) {
        const Eigen::Index known = std::min(seen.rows(), static_cast<Eigen::Index>(train.size()));
        if (known > 0 && (seen.cols() != static_cast<Eigen::Index>(train.points()) ||
                          seen.topRows(known) != train.values.topRows(known))) {
            throw ArgumentError("standard forecasters reused on a different series");
        }
        if (static_cast<Eigen::Index>(train.size()) > seen.rows()) seen = train.values;
    }

    void extend_gev(const FunctionalSeries& train) {
        check_prefix(train);
        const std::size_t from = gev.size();
        if (train.size() <= from) return;
        gev.resize(train.size());
        parallel_for(train.size() - from, [&](std::size_t i) {
            const std::size_t t = from + i;
            try {
                GevFitResult fit = fit_mle(train.curve(t));
                if (std::isfinite(fit.log_likelihood)) gev[t] = fit;
            } catch (const DegenerateDataError&) {
            }
        });
    }

    GaevDims ensure_dims(const FunctionalSeries& train) {
        if (!dims) {
            if (options.dims) {
                dims = options.dims;
            } else {
                const auto candidates = coarse_candidate_grid(options.free_xi_cv);
                dims = select_dims(train, candidates, options.max_var_order);
            }
        }
        return *dims;
    }

    void extend_gaev(const FunctionalSeries& train) {
        check_prefix(train);
        const GaevDims d = ensure_dims(train);
        if (!design) design = std::make_unique<GaevDesign>(train.grid, d);
        const std::size_t from = gaev.size();
        if (train.size() <= from) return;
        std::vector<std::optional<GaevFit>> slots(train.size() - from);
        parallel_for(slots.size(), [&](std::size_t i) { slots[i] = fit_gaev(train.curve(from + i), *design); });
        for (auto& s : slots) gaev.push_back(std::move(*s));
    }
};

}  // namespace

std::vector<NamedForecaster> make_standard_forecasters(const ForecasterOptions& options) {
    auto cache = std::make_shared<FitCache>();
    cache->options = options;
    const ForecastOptions fopts{options.max_var_order, false};

    std::vector<NamedForecaster> out;
    out.push_back({"fgev", [cache, fopts](const FunctionalSeries& train) {
                       cache->extend_gev(train);
                       const std::span<const std::optional<GevFitResult>> fits(cache->gev.data(), train.size());
                       return fgev_from_fits(fits, train.grid, 1, fopts).density.params;
                   }});
    out.push_back({"tsgaevm", [cache](const FunctionalSeries& train) {
                       cache->check_prefix(train);
                       const GaevDims d = cache->ensure_dims(train);
                       const auto last = train.curve(train.size() - 1);
                       return forecast_tsgaevm(last, train.grid, d, static_cast<int>(train.points())).params;
                   }});
    out.push_back({"fgaevm", [cache, fopts](const FunctionalSeries& train) {
                       cache->extend_gaev(train);
                       const std::span<const GaevFit> fits(cache->gaev.data(), train.size());
                       return fgaevm_from_fits(fits, *cache->design, 1, fopts).density.params;
                   }});
    return out;
}

std::vector<DivergenceReport> expanding_window_eval(const SimTruth& truth, std::span<const NamedForecaster> forecasters,
                                                    double test_fraction, const DivergenceOptions& divergence) {
    if (!(test_fraction > 0.0 && test_fraction < 0.5)) {
        throw ArgumentError("expanding_window_eval: test_fraction must lie in (0, 0.5)");
    }
    const std::size_t t = truth.series.size();
    if (truth.truth.size() != t) throw ArgumentError("expanding_window_eval: truth and series differ in length");
    const auto n = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(t) - 1e-12));
    if (n == 0 || n >= t) throw ArgumentError("expanding_window_eval: no usable test windows");

    std::vector<DivergenceReport> reports;
    for (const auto& f : forecasters) {
        std::vector<SampleDivergence> samples;
        std::vector<WindowFailure> failures;
        for (std::size_t w = 0; w < n; ++w) {
            const std::size_t target = t - n + w;
            try {
                const auto predicted = f.forecast(truth.series.head(target));
                samples.push_back(curve_divergence(truth.truth[target], predicted, divergence));
            } catch (const std::exception& e) {
                failures.push_back({w, e.what()});
            }
        }
        if (static_cast<double>(failures.size()) > 0.3 * static_cast<double>(n)) {
            std::ostringstream msg;
            msg << f.name << ": " << failures.size() << " of " << n << " windows failed; first: "
                << failures.front().message;
            throw FitError(msg.str());
        }
        reports.push_back(summarize(f.name, std::move(samples), std::move(failures)));
    }
    return reports;
}

MonteCarloResult monte_carlo(const DgpSpec& spec, int reps, const MonteCarloOptions& options) {
    spec.validate();
    if (reps < 2) throw ArgumentError("monte_carlo: reps must be at least 2");

    struct Outcome {
        std::vector<DivergenceReport> reports;
        std::string error;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(reps));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(reps));
    for (std::size_t r = 0; r < seeds.size(); ++r) seeds[r] = options.same_seed ? spec.seed : derive_seed(spec.seed, r);

    parallel_for(outcomes.size(), [&](std::size_t r) {
        try {
            DgpSpec rep_spec = spec;
            rep_spec.seed = seeds[r];
            const SimTruth truth = generate(rep_spec);
            ForecasterOptions fopts = options.forecasters;
            if (options.oracle_dims && spec.setting > 1) fopts.dims = spec.true_dims();
            const auto forecasters = make_standard_forecasters(fopts);
            outcomes[r].reports = expanding_window_eval(truth, forecasters, options.test_fraction, options.divergence);
        } catch (const std::exception& e) {
            outcomes[r].error = e.what();
        }
    });

    MonteCarloResult result;
    std::vector<std::string> methods;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& o = outcomes[r];
        if (!o.error.empty()) {
            result.failures.push_back({static_cast<int>(r), o.error});
            continue;
        }
        for (const auto& rep : o.reports) {
            if (std::find(methods.begin(), methods.end(), rep.method) == methods.end()) methods.push_back(rep.method);
            result.details.push_back({static_cast<int>(r), seeds[r], rep.method, rep.mean_jsd, rep.mean_kld,
                                      static_cast<int>(rep.failures.size())});
        }
    }

    for (const auto& method : methods) {
        for (const std::string metric : {"jsd", "kld"}) {
            std::vector<double> xs;
            for (const auto& d : result.details) {
                if (d.method == method) xs.push_back(metric == "jsd" ? d.jsd : d.kld);
            }
            SummaryRow row{spec.setting, method, metric, 0.0, 0.0, static_cast<int>(xs.size())};
            double sum = 0.0;
            for (double x : xs) sum += x;
            row.mean = sum / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - row.mean) * (x - row.mean);
            row.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
            result.summary.push_back(row);
        }
    }
    return result;
}

}  // namespace gevcast
