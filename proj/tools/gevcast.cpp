// gevcast: command-line driver for fitting, forecasting, bootstrap bands,
// cross-validation and the simulation study. See docs/cli.md.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevcast/bootstrap.hpp"
#include "gevcast/error.hpp"
#include "gevcast/forecast.hpp"
#include "gevcast/gaev.hpp"
#include "gevcast/ingest.hpp"
#include "gevcast/io.hpp"
#include "gevcast/metrics.hpp"
#include "gevcast/parallel.hpp"
#include "gevcast/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gevcast;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kFit = 4 };

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string method = "fgaevm";
    std::string dims = "5,5,0";
    bool cv = false;
    bool full_grid = false;
    bool free_xi = false;
    std::string candidates;
    int horizon = 1;
    double quantile = 0.999;
    int max_order = 5;
    int B = 1000;
    double level = 0.95;
    int burn_in = 50;
    bool write_replicates = false;
    int setting = 1;
    int reps = 50;
    int T = 50;
    int J = 30;
    int d = 5;
    double test_fraction = 0.2;
    bool oracle_dims = false;
    double innovation_sd = 0.3;
    double coefficient_spread = 2.0;
    std::uint64_t seed = 1;
    std::string forecast_file;
    std::string truth_file;
    std::string label = "forecast";
    int points = static_cast<int>(kDefaultDensityPoints);
    double kld_floor = 0.0;
    unsigned threads = 0;
};

// Everything that determines the outputs; the thread count is left out
// because results do not depend on it.
json config_json(const RunConfig& c) {
    json j{{"command", c.command}, {"output", c.output}};
    if (c.command == "forecast" || c.command == "intervals" || c.command == "cv") j["input"] = c.input;
    if (c.command == "forecast") {
        j["method"] = c.method;
        j["horizon"] = c.horizon;
    }
    if (c.command == "forecast" || c.command == "intervals") {
        j["dims"] = c.cv ? json("cv") : json(c.dims);
        j["quantile"] = c.quantile;
    }
    if (c.command == "forecast" || c.command == "intervals" || c.command == "cv") {
        j["max_order"] = c.max_order;
        j["full_grid"] = c.full_grid;
        j["free_xi"] = c.free_xi;
    }
    if (c.command == "cv" && !c.candidates.empty()) j["candidates"] = c.candidates;
    if (c.command == "intervals") {
        j["B"] = c.B;
        j["level"] = c.level;
        j["burn_in"] = c.burn_in;
        j["seed"] = c.seed;
    }
    if (c.command == "simulate") {
        j.update(json{{"setting", c.setting},
                      {"reps", c.reps},
                      {"T", c.T},
                      {"J", c.J},
                      {"d", c.d},
                      {"test_fraction", c.test_fraction},
                      {"oracle_dims", c.oracle_dims},
                      {"free_xi", c.free_xi},
                      {"innovation_sd", c.innovation_sd},
                      {"coefficient_spread", c.coefficient_spread},
                      {"seed", c.seed}});
    }
    if (c.command == "eval") {
        j.update(json{{"forecast", c.forecast_file},
                      {"truth", c.truth_file},
                      {"label", c.label},
                      {"points", c.points},
                      {"kld_floor", c.kld_floor}});
    }
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw SchemaError("cannot write " + path.string());
}

GaevDims parse_dims(const std::string& text) {
    GaevDims d;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> d.d_mu >> c1 >> d.d_sigma >> c2 >> d.d_xi) || c1 != ',' || c2 != ',' || !in.eof()) {
        throw ArgumentError("dims must look like 'd_mu,d_sigma,d_xi', got '" + text + "'");
    }
    d.validate();
    return d;
}

std::vector<GaevDims> parse_candidates(const std::string& text) {
    std::vector<GaevDims> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        if (!item.empty()) out.push_back(parse_dims(item));
    }
    return out;
}

void check_probability(double p, const std::string& what) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << what << " must lie strictly between 0 and 1, got " << p;
        throw DomainError(msg.str());
    }
}

// Daily `date,tmax` records are sliced into annual curves; files carrying
// the functional_series schema tag are loaded as they are.
FunctionalSeries load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    std::string first;
    std::getline(in, first);
    if (first.starts_with("# gevcast-schema:")) return io::load_series(path);
    const auto obs = parse_csv(fs::path(path));
    SliceResult sliced = slice_annual(obs);
    for (const auto& d : sliced.dropped) std::cerr << "warning: dropped year " << d.year << ": " << d.reason << '\n';
    return std::move(sliced.series);
}

std::vector<GaevDims> candidate_grid(const RunConfig& c) {
    if (!c.candidates.empty()) return parse_candidates(c.candidates);
    return c.full_grid ? full_candidate_grid(c.free_xi) : coarse_candidate_grid(c.free_xi);
}

GaevDims resolve_dims(const RunConfig& c, const FunctionalSeries& series, const fs::path& out) {
    if (!c.cv) return parse_dims(c.dims);
    const auto candidates = candidate_grid(c);
    std::cerr << "cv: evaluating " << candidates.size() << " candidates\n";
    const GaevDims d = select_dims(series, candidates, c.max_order);
    io::save_dims(out / "dims.json", d);
    return d;
}

int cmd_forecast(const RunConfig& c, const fs::path& out) {
    check_probability(c.quantile, "quantile");
    if (c.horizon < 1) throw ArgumentError("horizon must be at least 1");
    const FunctionalSeries series = load_input(c.input);
    const ForecastOptions options{c.max_order, false};

    ForecastDensity density;
    if (c.method == "fgev") {
        const auto fits = fit_years_gev(series);
        const FgevForecast f = fgev_from_fits(fits, series.grid, c.horizon, options);
        for (std::size_t t : f.imputed_years) {
            std::cerr << "warning: year " << series.years[t] << " fit was degenerate; carried forward\n";
        }
        io::save_var(out / "var_model.json", f.var);
        density = f.density;
    } else if (c.method == "fgaevm") {
        const GaevDims dims = resolve_dims(c, series, out);
        const GaevDesign design(series.grid, dims);
        const auto fits = fit_years_gaev(series, design);
        const FgaevmForecast f = fgaevm_from_fits(fits, design, c.horizon, options);
        io::save_var(out / "var_model.json", f.var);
        io::save_dims(out / "dims.json", dims);
        density = f.density;
    } else if (c.method == "tsgaevm") {
        if (c.horizon != 1) throw ArgumentError("tsgaevm forecasts one year ahead only (horizon 1)");
        const GaevDims dims = resolve_dims(c, series, out);
        density = forecast_tsgaevm(series.curve(series.size() - 1), series.grid, dims,
                                   static_cast<int>(series.points()));
        io::save_dims(out / "dims.json", dims);
    } else {
        throw ArgumentError("unknown method '" + c.method + "' (expected fgev, tsgaevm or fgaevm)");
    }

    const std::vector<double> curve = quantile_curve(density, c.quantile);
    const std::vector<io::LabelledCurve> curves{{c.method, curve}};
    io::save_curves(out / "quantile_curve.csv", density.grid, curves);
    io::save_density(out / "forecast_density.json", density);

    const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
    std::cout << c.method << ": " << curve.size() << " points, quantile " << c.quantile << " range [" << *lo << ", "
              << *hi << "]\n";
    return kOk;
}

int cmd_intervals(const RunConfig& c, const fs::path& out) {
    check_probability(c.quantile, "quantile");
    check_probability(c.level, "level");
    if (c.B < kMinBootstrapReplicates) {
        throw ArgumentError("B must be at least " + std::to_string(kMinBootstrapReplicates) + ", got " +
                            std::to_string(c.B));
    }
    const FunctionalSeries series = load_input(c.input);
    const GaevDims dims = resolve_dims(c, series, out);
    BootstrapOptions options;
    options.burn_in = c.burn_in;
    options.forecast.max_order = c.max_order;

    const BootstrapForecasts boot = sieve_bootstrap_forecasts(series, dims, c.quantile, c.B, c.seed, options);
    const IntervalBand pointwise = pointwise_interval(boot.curves, boot.grid, c.level);
    const IntervalBand band = simultaneous_band(boot.curves, boot.grid, c.level);

    const std::vector<io::LabelledCurve> point{{"point", boot.point}};
    io::save_curves(out / "point_forecast.csv", boot.grid, point);
    io::save_band(out / "pointwise_band.csv", pointwise);
    io::save_band(out / "simultaneous_band.csv", band);
    io::save_dims(out / "dims.json", dims);
    if (c.write_replicates) {
        std::vector<io::LabelledCurve> reps;
        for (Eigen::Index b = 0; b < boot.curves.rows(); ++b) {
            const Eigen::RowVectorXd row = boot.curves.row(b);
            reps.push_back({"b" + std::to_string(b + 1), std::vector<double>(row.data(), row.data() + row.size())});
        }
        io::save_curves(out / "bootstrap_curves.csv", boot.grid, reps);
    }
    std::cout << "intervals: B=" << c.B << " level=" << c.level << ", simultaneous band contains "
              << curves_inside(boot.curves, band) << " of " << c.B << " bootstrap curves\n";
    return kOk;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

int cmd_simulate(const RunConfig& c, const fs::path& out) {
    DgpSpec spec;
    spec.setting = c.setting;
    spec.T = c.T;
    spec.J = c.J;
    spec.d = c.d;
    spec.innovation_sd = c.innovation_sd;
    spec.coefficient_spread = c.coefficient_spread;
    spec.seed = c.seed;
    MonteCarloOptions options;
    options.test_fraction = c.test_fraction;
    options.oracle_dims = c.oracle_dims;
    options.forecasters.free_xi_cv = c.free_xi;
    options.forecasters.max_var_order = c.max_order;

    const MonteCarloResult r = monte_carlo(spec, c.reps, options);

    std::ostringstream summary;
    summary << "setting,method,metric,mean,sd,reps\n";
    for (const auto& row : r.summary) {
        summary << row.setting << ',' << row.method << ',' << row.metric << ',' << io::format_double(row.mean) << ','
                << io::format_double(row.sd) << ',' << row.reps << '\n';
    }
    write_text(out / "summary.csv", summary.str());

    std::ostringstream detail;
    detail << "setting,rep,seed,method,jsd,kld,failed_windows\n";
    for (const auto& d : r.details) {
        detail << c.setting << ',' << d.rep << ',' << d.seed << ',' << d.method << ',' << io::format_double(d.jsd)
               << ',' << io::format_double(d.kld) << ',' << d.failed_windows << '\n';
    }
    write_text(out / "replicates.csv", detail.str());

    if (!r.failures.empty()) {
        std::ostringstream failed;
        failed << "rep,message\n";
        for (const auto& f : r.failures) failed << f.rep << ',' << csv_field(f.message) << '\n';
        write_text(out / "failed_replicates.csv", failed.str());
        std::cerr << "warning: " << r.failures.size() << " of " << c.reps << " replicates failed\n";
    }

    std::cout << "setting " << c.setting << ", " << c.reps - static_cast<int>(r.failures.size())
              << " completed replicates\n";
    std::cout << "method    metric  mean(sd)\n";
    for (const auto& row : r.summary) {
        std::cout << row.method << std::string(10 - std::min<std::size_t>(row.method.size(), 9), ' ') << row.metric
                  << "     " << row.mean << " (" << row.sd << ")\n";
    }
    return kOk;
}

int cmd_cv(const RunConfig& c, const fs::path& out) {
    const FunctionalSeries series = load_input(c.input);
    const auto candidates = candidate_grid(c);
    std::cerr << "cv: evaluating " << candidates.size() << " candidates\n";
    const CvResult r = cross_validate(series, candidates, c.max_order);
    io::save_dims(out / "dims.json", r.selected);

    std::ostringstream scores;
    scores << "d_mu,d_sigma,d_xi,score,error\n";
    for (const auto& s : r.scores) {
        scores << s.dims.d_mu << ',' << s.dims.d_sigma << ',' << s.dims.d_xi << ',' << io::format_double(s.score) << ','
               << csv_field(s.error) << '\n';
    }
    write_text(out / "cv_scores.csv", scores.str());
    std::cout << "selected dims " << r.selected.to_string() << '\n';
    return kOk;
}

int cmd_eval(const RunConfig& c, const fs::path& out) {
    const ForecastDensity forecast = io::load_density(c.forecast_file);
    const ForecastDensity truth = io::load_density(c.truth_file);
    if (c.points < static_cast<int>(kMinDensityPoints)) {
        throw ArgumentError("points must be at least " + std::to_string(kMinDensityPoints));
    }
    const DivergenceOptions options{static_cast<std::size_t>(c.points), c.kld_floor};
    std::vector<SampleDivergence> samples{curve_divergence(truth.params, forecast.params, options)};
    const DivergenceReport report = summarize(c.label, std::move(samples));
    io::save_report(out / "divergence_report.json", report);
    std::cout << c.label << ": jsd " << report.mean_jsd << ", kld " << report.mean_kld << '\n';
    return kOk;
}

const char* error_type(const std::exception& e) {
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    if (dynamic_cast<const ArgumentError*>(&e)) return "ArgumentError";
    if (dynamic_cast<const SchemaError*>(&e)) return "SchemaError";
    if (dynamic_cast<const DegenerateDataError*>(&e)) return "DegenerateDataError";
    if (dynamic_cast<const FitError*>(&e)) return "FitError";
    return "InternalError";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) return kUsage;
    if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const DegenerateDataError*>(&e)) return kData;
    if (dynamic_cast<const FitError*>(&e)) return kFit;
    return kInternal;
}

int report_error(const std::string& type, const std::string& message, int code, const std::optional<fs::path>& out) {
    const json err{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
    std::cerr << err.dump() << '\n';
    if (out) {
        std::error_code ec;
        fs::create_directories(*out, ec);
        std::ofstream f(*out / "error.json");
        if (f) f << err.dump(2) << '\n';
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"gevcast: functional GEV forecasting of annual extreme curves"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--threads", c.threads, "Worker thread cap (default: all cores)");
    app.add_option("-o,--output", c.output,
                   "Output directory (default: $GEVCAST_OUTPUT_DIR, else gevcast_out)");

    const auto add_input = [&](CLI::App* sub) {
        sub->add_option("-i,--input", c.input, "Daily date,tmax CSV or functional_series CSV")->required();
    };
    const auto add_dims = [&](CLI::App* sub) {
        sub->add_option("--dims", c.dims, "Basis dimensions d_mu,d_sigma,d_xi")->capture_default_str();
        sub->add_flag("--cv", c.cv, "Select dimensions by leave-last-out cross-validation");
        sub->add_flag("--full-grid", c.full_grid, "Cross-validate over {3..10} per dimension");
        sub->add_flag("--free-xi", c.free_xi, "Let cross-validation vary d_xi as well");
        sub->add_option("--max-order", c.max_order, "Largest VAR order considered")->capture_default_str();
    };

    auto* forecast = app.add_subcommand("forecast", "One-step (or h-step) quantile-curve forecast");
    add_input(forecast);
    add_dims(forecast);
    forecast->add_option("-m,--method", c.method, "fgev, tsgaevm or fgaevm")->capture_default_str();
    forecast->add_option("--horizon", c.horizon, "Years ahead")->capture_default_str();
    forecast->add_option("-q,--quantile", c.quantile, "Quantile probability")->capture_default_str();

    auto* intervals = app.add_subcommand("intervals", "Sieve-bootstrap pointwise and simultaneous bands");
    add_input(intervals);
    add_dims(intervals);
    intervals->add_option("-q,--quantile", c.quantile, "Quantile probability")->capture_default_str();
    intervals->add_option("-B,--B", c.B, "Bootstrap replicates (>= 50)")->capture_default_str();
    intervals->add_option("--level", c.level, "Nominal coverage")->capture_default_str();
    intervals->add_option("--burn-in", c.burn_in, "Discarded steps per regenerated path")->capture_default_str();
    intervals->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    intervals->add_flag("--write-replicates", c.write_replicates, "Also write every bootstrap curve");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo comparison of fGEV, tsGAEVM and fGAEVM");
    simulate->add_option("--setting", c.setting, "Data-generating setting 1, 2 or 3")->capture_default_str();
    simulate->add_option("--reps", c.reps, "Monte-Carlo replicates")->capture_default_str();
    simulate->add_option("--T", c.T, "Curves per replicate")->capture_default_str();
    simulate->add_option("--J", c.J, "Grid points per curve")->capture_default_str();
    simulate->add_option("--d", c.d, "True basis dimension")->capture_default_str();
    simulate->add_option("--test-fraction", c.test_fraction, "Share of curves forecast")->capture_default_str();
    simulate->add_option("--innovation-sd", c.innovation_sd, "AR(1) innovation sd")->capture_default_str();
    simulate->add_option("--coefficient-spread", c.coefficient_spread, "Range of spline-coefficient means")
        ->capture_default_str();
    simulate->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    simulate->add_option("--max-order", c.max_order, "Largest VAR order considered")->capture_default_str();
    simulate->add_flag("--oracle-dims", c.oracle_dims, "Use the generating dimensions instead of CV");
    simulate->add_flag("--free-xi", c.free_xi, "Let cross-validation vary d_xi as well");

    auto* cv = app.add_subcommand("cv", "Cross-validated choice of basis dimensions");
    add_input(cv);
    cv->add_flag("--full-grid", c.full_grid, "Candidates {3..10} per dimension instead of {3,5,7,9}");
    cv->add_flag("--free-xi", c.free_xi, "Vary d_xi as well (otherwise 0)");
    cv->add_option("--candidates", c.candidates, "Explicit list, e.g. '3,3,0;5,5,0'");
    cv->add_option("--max-order", c.max_order, "Largest VAR order considered")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "JSD/KLD of a saved forecast density against a reference density");
    eval->add_option("--forecast", c.forecast_file, "forecast_density JSON")->required();
    eval->add_option("--truth", c.truth_file, "Reference forecast_density JSON")->required();
    eval->add_option("--label", c.label, "Method label in the report")->capture_default_str();
    eval->add_option("--points", c.points, "Density grid size")->capture_default_str();
    eval->add_option("--kld-floor", c.kld_floor, "Mass floor for KLD (0 = none)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("ArgumentError", e.what(), kUsage, std::nullopt);
    }

    if (c.output.empty()) {
        const char* env = std::getenv("GEVCAST_OUTPUT_DIR");
        c.output = env && *env ? env : "gevcast_out";
    }
    const fs::path out(c.output);
    c.command = app.get_subcommands().front()->get_name();

    try {
        set_max_threads(c.threads);
        fs::create_directories(out);
        write_text(out / "config.json", config_json(c).dump(2) + '\n');
        fs::remove(out / "error.json");
        if (c.command == "forecast") return cmd_forecast(c, out);
        if (c.command == "intervals") return cmd_intervals(c, out);
        if (c.command == "simulate") return cmd_simulate(c, out);
        if (c.command == "cv") return cmd_cv(c, out);
        return cmd_eval(c, out);
    } catch (const std::exception& e) {
        return report_error(error_type(e), e.what(), exit_code_for(e), out);
    }
}
