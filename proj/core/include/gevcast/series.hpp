#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gevcast {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// T curves observed on a common grid of J points: values(t, j) is the
/// observation for year t at grid point tau_j.
struct FunctionalSeries {
    std::vector<int> years;
    std::vector<double> grid;
    Eigen::MatrixXd values;  // T x J
    MaskMatrix imputed;      // T x J

    std::size_t size() const noexcept { return years.size(); }
    std::size_t points() const noexcept { return grid.size(); }

    std::vector<double> curve(std::size_t t) const;
    /// First n curves.
    FunctionalSeries head(std::size_t n) const;

    /// Throws ArgumentError when shapes disagree or values are not finite.
    void validate() const;

    static FunctionalSeries from_values(std::vector<int> years, std::vector<double> grid, Eigen::MatrixXd values);
};

}  // namespace gevcast
