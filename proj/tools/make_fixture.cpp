// Writes the synthetic daily-maximum temperature fixture: a seasonal
// sinusoid (summer around mid-January) with GEV noise, 1900-2019, plus a
// handful of missing days. Usage: make_fixture <out.csv> [seed]
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include "gevcast/gev.hpp"
#include "gevcast/random.hpp"

using namespace std::chrono;

namespace {

constexpr int kFirstYear = 1900;
constexpr int kLastYear = 2019;

gevcast::GevParams season(double day_of_year) {
    const double phase = 2.0 * std::numbers::pi * (day_of_year - 15.0) / 366.0;
    return {24.0 + 5.5 * std::cos(phase), 2.4 + 0.6 * std::cos(phase), -0.2};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_fixture <out.csv> [seed]\n";
        return 2;
    }
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 66062;
    gevcast::Rng rng(seed);

    // Short gaps that are interpolated, and one 10-day gap that drops 1950.
    std::set<sys_days> missing;
    const auto gap = [&](year_month_day start, int count) {
        for (int i = 0; i < count; ++i) missing.insert(sys_days{start} + days{i});
    };
    gap(1913y / March / 3, 2);
    gap(1950y / June / 10, 10);
    gap(1977y / January / 1, 1);
    gap(1988y / August / 20, 3);
    gap(2004y / December / 31, 1);
    gap(2011y / July / 4, 1);

    std::ofstream out(argv[1]);
    out << "date,tmax\n";
    for (sys_days d{year{kFirstYear} / January / 1}; d <= sys_days{year{kLastYear} / December / 31}; d += days{1}) {
        const year_month_day ymd{d};
        const double doy = (d - sys_days{ymd.year() / January / 1}).count() + 1.0;
        const double x = gevcast::quantile(season(doy), rng.uniform_open());
        out << static_cast<int>(ymd.year()) << '-';
        const auto m = static_cast<unsigned>(ymd.month()), dd = static_cast<unsigned>(ymd.day());
        out << (m < 10 ? "0" : "") << m << '-' << (dd < 10 ? "0" : "") << dd << ',';
        if (missing.count(d)) {
            out << "NA\n";
        } else {
            out << std::round(x * 10.0) / 10.0 << '\n';
        }
    }
    if (!out) {
        std::cerr << "write failed\n";
        return 1;
    }
    return 0;
}
