#pragma once

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <random>

namespace gevcast {

/// splitmix64 finaliser over (master, index); used to give every replicate
/// its own stream so that results do not depend on thread scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        for (;;) {
            const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

    double normal(double mean = 0.0, double sd = 1.0) {
        // Marsaglia polar method; written out so streams match across standard libraries.
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform_open() - 1.0;
            v = 2.0 * uniform_open() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return mean + sd * u * f;
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_open() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gevcast
