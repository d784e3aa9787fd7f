#include "gevcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gevcast/error.hpp"

namespace gevcast {

namespace {

void require_same_points(const DensityGrid& f, const DensityGrid& g) {
    if (f.points.size() != g.points.size() || f.masses.size() != f.points.size() ||
        g.masses.size() != g.points.size()) {
        throw ArgumentError("divergence: density grids differ in size");
    }
    if (f.points != g.points) throw ArgumentError("divergence: density grids use different points");
}

double plogq(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

}  // namespace

void DensityGrid::validate() const {
    if (points.size() != masses.size() || points.empty()) throw ArgumentError("DensityGrid: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && !(points[i] > points[i - 1])) throw ArgumentError("DensityGrid: points must increase strictly");
        if (!(masses[i] >= 0.0)) throw ArgumentError("DensityGrid: negative or NaN mass");
        total += masses[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("DensityGrid: masses do not sum to one");
}

std::pair<DensityGrid, DensityGrid> make_density_grid(const GevParams& p, const GevParams& q, std::size_t points) {
    if (points < kMinDensityPoints) {
        throw ArgumentError("make_density_grid: need at least 64 points, got " + std::to_string(points));
    }
    const double lo = std::min(quantile(p, 0.001), quantile(q, 0.001));
    const double hi = std::max(quantile(p, 0.999), quantile(q, 0.999));
    const double step = (hi - lo) / static_cast<double>(points - 1);

    DensityGrid f, g;
    f.points.resize(points);
    for (std::size_t i = 0; i < points; ++i) f.points[i] = lo + step * static_cast<double>(i);
    f.points.back() = hi;
    g.points = f.points;

    auto discretise = [&](const GevParams& par, DensityGrid& out) {
        out.masses.resize(points);
        double total = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
            out.masses[i] = pdf(par, out.points[i]) * step;
            total += out.masses[i];
        }
        if (total > 0.0 && std::isfinite(total)) {
            for (double& m : out.masses) m /= total;
            return;
        }
        // The whole distribution falls between two grid points: put its mass
        // on the point nearest the median.
        std::fill(out.masses.begin(), out.masses.end(), 0.0);
        const double median = quantile(par, 0.5);
        const auto nearest = static_cast<std::size_t>(
            std::clamp(std::round((median - lo) / step), 0.0, static_cast<double>(points - 1)));
        out.masses[nearest] = 1.0;
    };
    discretise(p, f);
    discretise(q, g);
    return {std::move(f), std::move(g)};
}

double jsd(const DensityGrid& f, const DensityGrid& g) {
    require_same_points(f, g);
    double total = 0.0;
    for (std::size_t i = 0; i < f.masses.size(); ++i) {
        const double m = 0.5 * (f.masses[i] + g.masses[i]);
        total += 0.5 * plogq(f.masses[i], m) + 0.5 * plogq(g.masses[i], m);
    }
    return std::clamp(total, 0.0, std::log(2.0));
}

double kld(const DensityGrid& f, const DensityGrid& g, double mass_floor) {
    require_same_points(f, g);
    double total = 0.0;
    for (std::size_t i = 0; i < f.masses.size(); ++i) {
        double a = f.masses[i];
        double b = g.masses[i];
        if (mass_floor > 0.0) {
            if (a == 0.0 && b == 0.0) continue;
            a = std::max(a, mass_floor);
            b = std::max(b, mass_floor);
        }
        if ((a > 0.0) != (b > 0.0)) return std::numeric_limits<double>::infinity();
        total += plogq(a, b) + plogq(b, a);
    }
    return std::max(total, 0.0);
}

SampleDivergence curve_divergence(std::span<const GevParams> truth, std::span<const GevParams> forecast,
                                  const DivergenceOptions& options) {
    if (truth.size() != forecast.size() || truth.empty()) {
        throw ArgumentError("curve_divergence: parameter curves must have equal, nonzero length");
    }
    SampleDivergence out;
    out.per_point_jsd.resize(truth.size());
    out.per_point_kld.resize(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        try {
            const auto [f, g] = make_density_grid(truth[j], forecast[j], options.points);
            out.per_point_jsd[j] = jsd(f, g);
            out.per_point_kld[j] = kld(f, g, options.kld_mass_floor);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "curve_divergence at tau index " << j << ": " << e.what();
            throw DomainError(msg.str());
        }
        out.jsd += out.per_point_jsd[j];
        out.kld += out.per_point_kld[j];
    }
    out.jsd /= static_cast<double>(truth.size());
    out.kld /= static_cast<double>(truth.size());
    return out;
}

DivergenceReport summarize(std::string method, std::vector<SampleDivergence> samples,
                           std::vector<WindowFailure> failures) {
    DivergenceReport report;
    report.method = std::move(method);
    report.samples = std::move(samples);
    report.failures = std::move(failures);
    if (!report.samples.empty()) {
        for (const auto& s : report.samples) {
            report.mean_jsd += s.jsd;
            report.mean_kld += s.kld;
        }
        report.mean_jsd /= static_cast<double>(report.samples.size());
        report.mean_kld /= static_cast<double>(report.samples.size());
    } else {
        report.mean_jsd = report.mean_kld = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

double curve_jsd(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.size() != predicted.size()) throw ArgumentError("curve_jsd: curves differ in length");
    if (observed.size() < 3) throw ArgumentError("curve_jsd: curves need at least 3 points");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < observed.size(); ++j) {
        if (!std::isfinite(observed[j]) || !std::isfinite(predicted[j])) {
            throw ArgumentError("curve_jsd: curves must be finite");
        }
        lo = std::min({lo, observed[j], predicted[j]});
        hi = std::max({hi, observed[j], predicted[j]});
    }
    const double range = hi - lo;
    if (range == 0.0) return 0.0;
    const double shift = lo - 1e-6 * range;

    DensityGrid f, g;
    f.masses.resize(observed.size());
    g.masses.resize(observed.size());
    double sf = 0.0, sg = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j) {
        f.masses[j] = observed[j] - shift;
        g.masses[j] = predicted[j] - shift;
        sf += f.masses[j];
        sg += g.masses[j];
    }
    for (std::size_t j = 0; j < observed.size(); ++j) {
        f.masses[j] /= sf;
        g.masses[j] /= sg;
    }
    f.points.resize(observed.size());
    for (std::size_t j = 0; j < observed.size(); ++j) f.points[j] = static_cast<double>(j);
    g.points = f.points;
    return jsd(f, g);
}

}  // namespace gevcast
