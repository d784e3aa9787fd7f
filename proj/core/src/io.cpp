#include "gevcast/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gevcast/error.hpp"

namespace gevcast::io {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return {buf.data(), end};
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw SchemaError(where + ": invalid number '" + std::string(s) + "'");
    }
    return x;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw SchemaError("write failed: " + path.string());
}

// Reads a CSV file: checks the schema line, collects `# key=value` metadata,
// checks the header and returns the data rows.
struct CsvFile {
    std::map<std::string, std::string> meta;
    std::vector<std::string> rows;
};

CsvFile read_csv(const std::filesystem::path& path, const std::string& schema, const std::string& header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::string line;
    const std::string prefix = "# gevcast-schema: ";
    if (!std::getline(in, line) || !line.starts_with(prefix)) {
        throw SchemaError(path.string() + ": missing schema tag");
    }
    const std::string tag = line.substr(prefix.size());
    if (tag != schema) throw SchemaError(path.string() + ": schema '" + tag + "', expected '" + schema + "'");

    CsvFile file;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.starts_with("# ")) {
            std::istringstream fields(line.substr(2));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq != std::string::npos) file.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            continue;
        }
        if (!saw_header) {
            if (line != header) throw SchemaError(path.string() + ": expected header '" + header + "'");
            saw_header = true;
            continue;
        }
        if (!line.empty()) file.rows.push_back(line);
    }
    if (!saw_header) throw SchemaError(path.string() + ": missing header");
    return file;
}

json number(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

double number(const json& j) {
    if (j.is_string()) return parse_double(j.get<std::string>(), "json");
    return j.get<double>();
}

json vector_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

std::vector<double> vector_from(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) out.push_back(number(x));
    return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from(const json& j) {
    Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != m.rows()) throw SchemaError("matrix row count mismatch");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto& row = data[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw SchemaError("matrix column count mismatch");
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = number(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    finish(out, path);
}

json read_json(const std::filesystem::path& path, const std::string& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string()) {
        throw SchemaError(path.string() + ": missing schema tag");
    }
    const auto tag = doc["schema"].get<std::string>();
    if (tag != schema) throw SchemaError(path.string() + ": schema '" + tag + "', expected '" + schema + "'");
    return doc;
}

template <typename F>
auto guarded(const std::filesystem::path& path, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

const char* kind_name(BandKind k) { return k == BandKind::pointwise ? "pointwise" : "simultaneous"; }

}  // namespace

// FunctionalSeries

void save_series(const std::filesystem::path& path, const FunctionalSeries& series) {
    series.validate();
    auto out = open_out(path);
    out << "# gevcast-schema: " << kSeriesSchema << '\n' << "label,tau_index,tau,value,imputed\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        for (std::size_t j = 0; j < series.points(); ++j) {
            const auto ti = static_cast<Eigen::Index>(t);
            const auto ji = static_cast<Eigen::Index>(j);
            out << series.years[t] << ',' << j + 1 << ',' << format_double(series.grid[j]) << ','
                << format_double(series.values(ti, ji)) << ',' << (series.imputed(ti, ji) ? 1 : 0) << '\n';
        }
    }
    finish(out, path);
}

FunctionalSeries load_series(const std::filesystem::path& path) {
    const auto file = read_csv(path, kSeriesSchema, "label,tau_index,tau,value,imputed");
    std::vector<int> years;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<bool> imputed;
    for (std::size_t r = 0; r < file.rows.size(); ++r) {
        const std::string where = path.string() + ": row " + std::to_string(r + 1);
        const auto f = split(file.rows[r]);
        if (f.size() != 5) throw SchemaError(where + ": expected 5 fields");
        int year = 0;
        std::size_t index = 0;
        std::from_chars(f[0].data(), f[0].data() + f[0].size(), year);
        std::from_chars(f[1].data(), f[1].data() + f[1].size(), index);
        if (years.empty() || years.back() != year) {
            if (!years.empty() && index != 1) throw SchemaError(where + ": curve does not start at tau_index 1");
            years.push_back(year);
        }
        if (years.size() == 1) {
            if (index != grid.size() + 1) throw SchemaError(where + ": tau_index out of sequence");
            grid.push_back(parse_double(f[2], where));
        } else if (index == 0 || index > grid.size() || parse_double(f[2], where) != grid[index - 1]) {
            throw SchemaError(where + ": grid differs from the first curve");
        }
        values.push_back(parse_double(f[3], where));
        imputed.push_back(f[4] == "1");
    }
    const std::size_t t = years.size(), j = grid.size();
    if (values.size() != t * j) throw SchemaError(path.string() + ": curves have unequal lengths");
    FunctionalSeries s;
    s.years = std::move(years);
    s.grid = std::move(grid);
    s.values.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    s.imputed.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    for (std::size_t a = 0; a < t; ++a) {
        for (std::size_t b = 0; b < j; ++b) {
            s.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = values[a * j + b];
            s.imputed(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = imputed[a * j + b];
        }
    }
    s.validate();
    return s;
}

// IntervalBand

void save_band(const std::filesystem::path& path, const IntervalBand& band) {
    if (band.lower.size() != band.grid.size() || band.upper.size() != band.grid.size()) {
        throw ArgumentError("save_band: band vectors differ in length");
    }
    auto out = open_out(path);
    out << "# gevcast-schema: " << kBandSchema << '\n'
        << "# level=" << format_double(band.level) << " kind=" << kind_name(band.kind)
        << " replicates=" << band.replicates << '\n'
        << "label,tau_index,tau,value\n";
    for (const auto& [label, v] : {std::pair{"lower", &band.lower}, std::pair{"upper", &band.upper}}) {
        for (std::size_t j = 0; j < band.grid.size(); ++j) {
            out << label << ',' << j + 1 << ',' << format_double(band.grid[j]) << ',' << format_double((*v)[j])
                << '\n';
        }
    }
    finish(out, path);
}

// Quantile curves

namespace {

void write_curves(std::ostream& out, std::span<const double> grid, std::span<const LabelledCurve> curves) {
    out << "label,tau_index,tau,value\n";
    for (const auto& c : curves) {
        if (c.values.size() != grid.size()) throw ArgumentError("save_curves: curve '" + c.label + "' has wrong length");
        for (std::size_t j = 0; j < grid.size(); ++j) {
            out << c.label << ',' << j + 1 << ',' << format_double(grid[j]) << ',' << format_double(c.values[j])
                << '\n';
        }
    }
}

std::vector<LabelledCurve> parse_curves(const std::filesystem::path& path, const std::vector<std::string>& rows,
                                        std::vector<double>& grid) {
    std::vector<LabelledCurve> curves;
    grid.clear();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string where = path.string() + ": row " + std::to_string(r + 1);
        const auto f = split(rows[r]);
        if (f.size() != 4) throw SchemaError(where + ": expected 4 fields");
        std::size_t index = 0;
        std::from_chars(f[1].data(), f[1].data() + f[1].size(), index);
        if (curves.empty() || curves.back().label != f[0]) curves.push_back({std::string(f[0]), {}});
        auto& c = curves.back();
        if (index != c.values.size() + 1) throw SchemaError(where + ": tau_index out of sequence");
        const double tau = parse_double(f[2], where);
        if (curves.size() == 1) {
            grid.push_back(tau);
        } else if (index > grid.size() || grid[index - 1] != tau) {
            throw SchemaError(where + ": grid differs from the first curve");
        }
        c.values.push_back(parse_double(f[3], where));
    }
    for (const auto& c : curves) {
        if (c.values.size() != grid.size()) throw SchemaError(path.string() + ": curves have unequal lengths");
    }
    return curves;
}

}  // namespace

IntervalBand load_band(const std::filesystem::path& path) {
    const auto file = read_csv(path, kBandSchema, "label,tau_index,tau,value");
    IntervalBand band;
    const auto curves = parse_curves(path, file.rows, band.grid);
    if (curves.size() != 2 || curves[0].label != "lower" || curves[1].label != "upper") {
        throw SchemaError(path.string() + ": expected curves 'lower' then 'upper'");
    }
    band.lower = curves[0].values;
    band.upper = curves[1].values;
    const auto get = [&](const std::string& key) {
        const auto it = file.meta.find(key);
        if (it == file.meta.end()) throw SchemaError(path.string() + ": missing metadata '" + key + "'");
        return it->second;
    };
    band.level = parse_double(get("level"), path.string());
    const auto kind = get("kind");
    if (kind == "pointwise") {
        band.kind = BandKind::pointwise;
    } else if (kind == "simultaneous") {
        band.kind = BandKind::simultaneous;
    } else {
        throw SchemaError(path.string() + ": unknown band kind '" + kind + "'");
    }
    band.replicates = static_cast<int>(parse_double(get("replicates"), path.string()));
    return band;
}

void save_curves(const std::filesystem::path& path, std::span<const double> grid,
                 std::span<const LabelledCurve> curves) {
    auto out = open_out(path);
    out << "# gevcast-schema: " << kCurveSchema << '\n';
    write_curves(out, grid, curves);
    finish(out, path);
}

std::vector<LabelledCurve> load_curves(const std::filesystem::path& path, std::vector<double>* grid) {
    const auto file = read_csv(path, kCurveSchema, "label,tau_index,tau,value");
    std::vector<double> g;
    auto curves = parse_curves(path, file.rows, g);
    if (grid) *grid = std::move(g);
    return curves;
}

// ForecastDensity

void save_density(const std::filesystem::path& path, const ForecastDensity& density) {
    if (density.params.size() != density.grid.size()) throw ArgumentError("save_density: grid/params length mismatch");
    std::vector<double> mu, sigma, xi;
    for (const auto& p : density.params) {
        mu.push_back(p.mu());
        sigma.push_back(p.sigma());
        xi.push_back(p.xi());
    }
    write_json(path, json{{"schema", kDensitySchema},
                          {"horizon", density.horizon},
                          {"grid", vector_json(density.grid)},
                          {"mu", vector_json(mu)},
                          {"sigma", vector_json(sigma)},
                          {"xi", vector_json(xi)}});
}

ForecastDensity load_density(const std::filesystem::path& path) {
    const auto doc = read_json(path, kDensitySchema);
    return guarded(path, [&] {
        ForecastDensity d;
        d.horizon = doc.at("horizon").get<int>();
        d.grid = vector_from(doc.at("grid"));
        const auto mu = vector_from(doc.at("mu"));
        const auto sigma = vector_from(doc.at("sigma"));
        const auto xi = vector_from(doc.at("xi"));
        if (mu.size() != d.grid.size() || sigma.size() != d.grid.size() || xi.size() != d.grid.size()) {
            throw SchemaError(path.string() + ": parameter arrays differ in length from the grid");
        }
        for (std::size_t j = 0; j < d.grid.size(); ++j) d.params.emplace_back(mu[j], sigma[j], xi[j]);
        return d;
    });
}

// DivergenceReport

void save_report(const std::filesystem::path& path, const DivergenceReport& report) {
    json samples = json::array();
    for (const auto& s : report.samples) {
        samples.push_back(json{{"jsd", number(s.jsd)},
                               {"kld", number(s.kld)},
                               {"per_point_jsd", vector_json(s.per_point_jsd)},
                               {"per_point_kld", vector_json(s.per_point_kld)}});
    }
    json failures = json::array();
    for (const auto& f : report.failures) failures.push_back(json{{"window", f.window}, {"message", f.message}});
    write_json(path, json{{"schema", kReportSchema},
                          {"method", report.method},
                          {"mean_jsd", number(report.mean_jsd)},
                          {"mean_kld", number(report.mean_kld)},
                          {"samples", std::move(samples)},
                          {"failures", std::move(failures)}});
}

DivergenceReport load_report(const std::filesystem::path& path) {
    const auto doc = read_json(path, kReportSchema);
    return guarded(path, [&] {
        DivergenceReport r;
        r.method = doc.at("method").get<std::string>();
        r.mean_jsd = number(doc.at("mean_jsd"));
        r.mean_kld = number(doc.at("mean_kld"));
        for (const auto& s : doc.at("samples")) {
            r.samples.push_back({number(s.at("jsd")), number(s.at("kld")), vector_from(s.at("per_point_jsd")),
                                 vector_from(s.at("per_point_kld"))});
        }
        for (const auto& f : doc.at("failures")) {
            r.failures.push_back({f.at("window").get<std::size_t>(), f.at("message").get<std::string>()});
        }
        return r;
    });
}

// VarModel

void save_var(const std::filesystem::path& path, const VarModel& model) {
    json mats = json::array();
    for (const auto& a : model.coeff_mats) mats.push_back(matrix_json(a));
    const Eigen::VectorXd& c = model.intercept;
    write_json(path, json{{"schema", kVarSchema},
                          {"order", model.order},
                          {"fallback", model.fallback},
                          {"aicc", number(model.aicc)},
                          {"intercept", vector_json(std::vector<double>(c.data(), c.data() + c.size()))},
                          {"coeff_mats", std::move(mats)},
                          {"residuals", matrix_json(model.residuals)},
                          {"resid_cov", matrix_json(model.resid_cov)}});
}

VarModel load_var(const std::filesystem::path& path) {
    const auto doc = read_json(path, kVarSchema);
    return guarded(path, [&] {
        VarModel m;
        m.order = doc.at("order").get<int>();
        m.fallback = doc.at("fallback").get<bool>();
        m.aicc = number(doc.at("aicc"));
        const auto c = vector_from(doc.at("intercept"));
        m.intercept = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        for (const auto& a : doc.at("coeff_mats")) m.coeff_mats.push_back(matrix_from(a));
        m.residuals = matrix_from(doc.at("residuals"));
        m.resid_cov = matrix_from(doc.at("resid_cov"));
        return m;
    });
}

// GaevDims

void save_dims(const std::filesystem::path& path, const GaevDims& dims) {
    write_json(path, json{{"schema", kDimsSchema}, {"d_mu", dims.d_mu}, {"d_sigma", dims.d_sigma}, {"d_xi", dims.d_xi}});
}

GaevDims load_dims(const std::filesystem::path& path) {
    const auto doc = read_json(path, kDimsSchema);
    return guarded(path, [&] {
        GaevDims d{doc.at("d_mu").get<int>(), doc.at("d_sigma").get<int>(), doc.at("d_xi").get<int>()};
        d.validate();
        return d;
    });
}

}  // namespace gevcast::io
