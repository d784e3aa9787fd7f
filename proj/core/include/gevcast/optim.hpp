#pragma once

#include <functional>

#include <Eigen/Core>

namespace gevcast::optim {

/// Objective value and, when grad is non-null, its gradient. Infeasible
/// points must return kPenalty (or anything >= it).
using DifferentiableObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
using Objective = std::function<double(const Eigen::VectorXd& x)>;

/// Large finite stand-in for an impossible point during search.
inline constexpr double kPenalty = 1e100;

struct Options {
    int max_iterations = 500;
    double step_tolerance = 1e-8;
    double gradient_tolerance = 1e-8;
};

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Quasi-Newton minimisation with an inverse-Hessian BFGS update and
/// backtracking Armijo line search. Never returns a point worse than x0.
Result minimize_bfgs(const DifferentiableObjective& f, Eigen::VectorXd x0, const Options& options = {});

/// Derivative-free Nelder-Mead simplex search; initial simplex offsets are
/// max(0.1 * |x_i|, step).
Result minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0, const Options& options = {},
                            double step = 0.1);

/// BFGS, then, if it did not converge, a Nelder-Mead restart from the best
/// point followed by a second BFGS pass.
Result minimize(const DifferentiableObjective& f, Eigen::VectorXd x0, const Options& options = {});

}  // namespace gevcast::optim
