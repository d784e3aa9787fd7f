#include "gevcast/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gevcast/error.hpp"

namespace gevcast {

// FunctionalSeries

std::vector<double> FunctionalSeries::curve(std::size_t t) const {
    const Eigen::RowVectorXd row = values.row(static_cast<Eigen::Index>(t));
    return {row.data(), row.data() + row.size()};
}

FunctionalSeries FunctionalSeries::head(std::size_t n) const {
    if (n > size()) throw ArgumentError("FunctionalSeries::head: asked for more curves than available");
    FunctionalSeries out;
    out.years.assign(years.begin(), years.begin() + static_cast<std::ptrdiff_t>(n));
    out.grid = grid;
    out.values = values.topRows(static_cast<Eigen::Index>(n));
    out.imputed = imputed.topRows(static_cast<Eigen::Index>(n));
    return out;
}

void FunctionalSeries::validate() const {
    const auto t = static_cast<Eigen::Index>(years.size());
    const auto j = static_cast<Eigen::Index>(grid.size());
    if (values.rows() != t || values.cols() != j) throw ArgumentError("FunctionalSeries: values are not T x J");
    if (imputed.rows() != t || imputed.cols() != j) throw ArgumentError("FunctionalSeries: imputed mask is not T x J");
    if (!values.allFinite()) throw ArgumentError("FunctionalSeries: values must be finite");
}

FunctionalSeries FunctionalSeries::from_values(std::vector<int> years, std::vector<double> grid, Eigen::MatrixXd values) {
    FunctionalSeries s;
    s.years = std::move(years);
    s.grid = std::move(grid);
    s.values = std::move(values);
    s.imputed = MaskMatrix::Constant(s.values.rows(), s.values.cols(), false);
    s.validate();
    return s;
}

// Parsing

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_date(std::string_view s, std::chrono::year_month_day& out) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_number(s.substr(0, 4), y) || !parse_number(s.substr(5, 2), m) || !parse_number(s.substr(8, 2), d)) {
        return false;
    }
    out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    return out.ok();
}

std::string format_date(const std::chrono::year_month_day& d) {
    std::ostringstream out;
    out << static_cast<int>(d.year()) << '-' << (static_cast<unsigned>(d.month()) < 10 ? "0" : "")
        << static_cast<unsigned>(d.month()) << '-' << (static_cast<unsigned>(d.day()) < 10 ? "0" : "")
        << static_cast<unsigned>(d.day());
    return out.str();
}

[[noreturn]] void malformed(const std::string& source, std::size_t line, const std::string& what) {
    throw SchemaError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<DailyObservation> parse_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw SchemaError(source + ": empty file (expected header 'date,tmax')");
    ++line_no;
    if (trim(line) != "date,tmax") malformed(source, line_no, "expected header 'date,tmax'");

    std::vector<DailyObservation> out;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
            malformed(source, line_no, "expected two comma-separated fields");
        }
        DailyObservation obs;
        if (!parse_date(trim(row.substr(0, comma)), obs.date)) malformed(source, line_no, "invalid ISO-8601 date");
        const std::string_view value = trim(row.substr(comma + 1));
        if (value.empty() || value == "NA") continue;
        if (!parse_number(value, obs.tmax) || !std::isfinite(obs.tmax)) {
            malformed(source, line_no, "invalid temperature '" + std::string(value) + "'");
        }
        out.push_back(obs);
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const DailyObservation& a, const DailyObservation& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].date == out[i - 1].date) {
            throw SchemaError(source + ": duplicate date " + format_date(out[i].date));
        }
    }
    return out;
}

std::vector<DailyObservation> parse_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    return parse_csv(in, path.string());
}

// Slicing

std::size_t day_slot(std::chrono::month_day md) {
    static constexpr std::array<unsigned, 12> kLeapOffsets = {0, 31, 60, 91, 121, 152, 182, 213, 244, 274, 305, 335};
    const auto m = static_cast<unsigned>(md.month());
    const auto d = static_cast<unsigned>(md.day());
    if (m < 1 || m > 12 || d < 1) throw ArgumentError("day_slot: invalid month/day");
    return kLeapOffsets[m - 1] + d - 1;
}

SliceResult slice_annual(std::span<const DailyObservation> observations, const SliceOptions& options) {
    constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
    std::map<int, std::array<double, kDaysPerCurve>> by_year;
    for (const auto& obs : observations) {
        auto [it, inserted] = by_year.try_emplace(static_cast<int>(obs.date.year()));
        if (inserted) it->second.fill(kMissing);
        it->second[day_slot(std::chrono::month_day{obs.date.month(), obs.date.day()})] = obs.tmax;
    }

    SliceResult result;
    std::vector<std::array<double, kDaysPerCurve>> kept_values;
    std::vector<std::array<bool, kDaysPerCurve>> kept_masks;

    for (auto& [year, slots] : by_year) {
        const bool leap = std::chrono::year{year}.is_leap();
        const std::size_t calendar_days = leap ? 366 : 365;

        std::size_t present = 0;
        int longest = 0, run = 0;
        for (std::size_t s = 0; s < kDaysPerCurve; ++s) {
            if (!leap && s == kFeb29Slot) continue;  // not a real day; does not break or extend runs
            if (std::isnan(slots[s])) {
                longest = std::max(longest, ++run);
            } else {
                ++present;
                run = 0;
            }
        }
        const double coverage = static_cast<double>(present) / static_cast<double>(calendar_days);
        if (coverage < options.min_coverage) {
            std::ostringstream why;
            why << "only " << present << " of " << calendar_days << " days present";
            result.dropped.push_back({year, why.str()});
            continue;
        }
        if (longest > options.max_gap) {
            result.dropped.push_back({year, "gap of " + std::to_string(longest) + " consecutive missing days"});
            continue;
        }

        std::array<bool, kDaysPerCurve> mask{};
        std::size_t s = 0;
        while (s < kDaysPerCurve) {
            if (!std::isnan(slots[s])) {
                ++s;
                continue;
            }
            std::size_t e = s;
            while (e < kDaysPerCurve && std::isnan(slots[e])) ++e;
            const bool has_left = s > 0;
            const bool has_right = e < kDaysPerCurve;
            for (std::size_t k = s; k < e; ++k) {
                if (has_left && has_right) {
                    const double w = static_cast<double>(k - s + 1) / static_cast<double>(e - s + 1);
                    slots[k] = (1.0 - w) * slots[s - 1] + w * slots[e];
                } else {
                    slots[k] = has_left ? slots[s - 1] : slots[e];
                }
                mask[k] = true;
            }
            s = e;
        }
        kept_values.push_back(slots);
        kept_masks.push_back(mask);
        result.series.years.push_back(year);
    }

    if (result.series.years.empty()) throw DegenerateDataError("slice_annual: no year has enough observations");

    const auto t = static_cast<Eigen::Index>(kept_values.size());
    result.series.grid.resize(kDaysPerCurve);
    for (std::size_t j = 0; j < kDaysPerCurve; ++j) result.series.grid[j] = static_cast<double>(j + 1);
    result.series.values.resize(t, static_cast<Eigen::Index>(kDaysPerCurve));
    result.series.imputed.resize(t, static_cast<Eigen::Index>(kDaysPerCurve));
    for (Eigen::Index i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < kDaysPerCurve; ++j) {
            result.series.values(i, static_cast<Eigen::Index>(j)) = kept_values[static_cast<std::size_t>(i)][j];
            result.series.imputed(i, static_cast<Eigen::Index>(j)) = kept_masks[static_cast<std::size_t>(i)][j];
        }
    }
    return result;
}

}  // namespace gevcast
