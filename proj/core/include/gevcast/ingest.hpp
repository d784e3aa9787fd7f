#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gevcast/series.hpp"

namespace gevcast {

/// Points per annual curve: one slot per calendar day of a leap year.
inline constexpr std::size_t kDaysPerCurve = 366;
/// Zero-based slot of February 29.
inline constexpr std::size_t kFeb29Slot = 59;

struct DailyObservation {
    std::chrono::year_month_day date;
    double tmax = 0.0;
};

/// Reads a `date,tmax` CSV (ISO-8601 dates, decimal degrees). Rows with an
/// empty or `NA` value count as missing. Returns observations sorted by date.
/// Throws SchemaError naming the line for malformed rows and naming the date
/// for duplicates.
std::vector<DailyObservation> parse_csv(const std::filesystem::path& path);
std::vector<DailyObservation> parse_csv(std::istream& in, const std::string& source = "<stream>");

struct SliceOptions {
    double min_coverage = 0.9;  // fraction of calendar days that must be present
    int max_gap = 7;            // longest run of missing days that is interpolated
};

struct DroppedYear {
    int year = 0;
    std::string reason;
};

struct SliceResult {
    FunctionalSeries series;
    std::vector<DroppedYear> dropped;
};

/// Slot (0..365) of a month/day in the leap-year calendar.
std::size_t day_slot(std::chrono::month_day md);

/// Cuts daily observations into calendar-year curves on a 366-point grid
/// (tau = 1..366). Common-year February 29 becomes the mean of February 28
/// and March 1; other gaps up to max_gap days are interpolated linearly
/// (nearest value at the year edges); imputed cells are flagged. Years with
/// a longer gap or below min_coverage are dropped and reported. Throws
/// DegenerateDataError when no year survives.
SliceResult slice_annual(std::span<const DailyObservation> observations, const SliceOptions& options = {});

}  // namespace gevcast
