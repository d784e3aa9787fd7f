#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gevcast/bootstrap.hpp"
#include "gevcast/forecast.hpp"
#include "gevcast/gaev.hpp"
#include "gevcast/metrics.hpp"
#include "gevcast/series.hpp"
#include "gevcast/var.hpp"

// Persistence. Every file carries a schema tag ("name/version"); loaders
// throw SchemaError when the tag is missing, unknown or of another version.
// CSV files start with a `# gevcast-schema: <tag>` line; JSON documents
// have a top-level "schema" member. Doubles are written in shortest
// round-trip form, so save followed by load reproduces values exactly.

namespace gevcast::io {

inline constexpr const char* kSeriesSchema = "functional_series/1";
inline constexpr const char* kBandSchema = "interval_band/1";
inline constexpr const char* kCurveSchema = "quantile_curve/1";
inline constexpr const char* kDensitySchema = "forecast_density/1";
inline constexpr const char* kReportSchema = "divergence_report/1";
inline constexpr const char* kVarSchema = "var_model/1";
inline constexpr const char* kDimsSchema = "gaev_dims/1";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// CSV, long format: label,tau_index,tau,value[,imputed]

void save_series(const std::filesystem::path& path, const FunctionalSeries& series);
FunctionalSeries load_series(const std::filesystem::path& path);

/// Rows labelled "lower" and "upper"; level, kind and replicate count go in
/// a `# key=value` metadata line.
void save_band(const std::filesystem::path& path, const IntervalBand& band);
IntervalBand load_band(const std::filesystem::path& path);

struct LabelledCurve {
    std::string label;
    std::vector<double> values;
};

/// One or more curves on a shared grid (e.g. forecast quantile curves).
void save_curves(const std::filesystem::path& path, std::span<const double> grid,
                 std::span<const LabelledCurve> curves);
std::vector<LabelledCurve> load_curves(const std::filesystem::path& path, std::vector<double>* grid = nullptr);

// JSON

void save_density(const std::filesystem::path& path, const ForecastDensity& density);
ForecastDensity load_density(const std::filesystem::path& path);

void save_report(const std::filesystem::path& path, const DivergenceReport& report);
DivergenceReport load_report(const std::filesystem::path& path);

void save_var(const std::filesystem::path& path, const VarModel& model);
VarModel load_var(const std::filesystem::path& path);

void save_dims(const std::filesystem::path& path, const GaevDims& dims);
GaevDims load_dims(const std::filesystem::path& path);

}  // namespace gevcast::io
