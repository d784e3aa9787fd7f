#include "gevcast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace gevcast::optim {

namespace {

bool feasible(double value) { return std::isfinite(value) && value < kPenalty; }

}  // namespace

Result minimize_bfgs(const DifferentiableObjective& f, Eigen::VectorXd x0, const Options& options) {
    const Eigen::Index n = x0.size();
    Eigen::VectorXd g(n);
    double fx = f(x0, &g);

    Result result;
    result.x = std::move(x0);
    result.value = fx;
    if (!feasible(fx) || !g.allFinite()) return result;

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    bool fresh = true;
    Eigen::VectorXd x_new(n), g_new(n);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance * std::max(1.0, std::abs(fx))) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd dir = -inv_hessian * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            inv_hessian.setIdentity();
            fresh = true;
            dir = -g;
            slope = -g.squaredNorm();
        }
        if (fresh) {
            // Unit-free first step: move at most one unit in any coordinate.
            const double scale = 1.0 / std::max(1.0, dir.lpNorm<Eigen::Infinity>());
            dir *= scale;
            slope *= scale;
        }

        double alpha = 1.0;
        double f_new = kPenalty;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            x_new = result.x + alpha * dir;
            f_new = f(x_new, &g_new);
            if (feasible(f_new) && g_new.allFinite() && f_new <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= feasible(f_new) ? 0.5 : 0.25;
        }
        if (!accepted) {
            if (!fresh) {
                // Stale curvature; retry once along steepest descent.
                inv_hessian.setIdentity();
                fresh = true;
                continue;
            }
            result.converged =
                g.lpNorm<Eigen::Infinity>() <= std::sqrt(options.gradient_tolerance) * std::max(1.0, std::abs(fx));
            break;
        }

        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd y = g_new - g;
        result.x = x_new;
        fx = f_new;
        g = g_new;
        result.value = fx;

        if (s.lpNorm<Eigen::Infinity>() < options.step_tolerance) {
            result.converged = true;
            break;
        }

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) {
                inv_hessian = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                fresh = false;
            }
            const Eigen::VectorXd hy = inv_hessian * y;
            const double yhy = y.dot(hy);
            inv_hessian += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                           (hy * s.transpose() + s * hy.transpose()) / sy;
        }
    }
    return result;
}

Result minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0, const Options& options, double step) {
    const auto n = static_cast<std::size_t>(x0.size());
    std::vector<Eigen::VectorXd> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        simplex[i + 1][ii] += std::max(0.1 * std::abs(x0[ii]), step);
    }
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    Result result;
    const int max_evals = options.max_iterations * static_cast<int>(n + 1);
    int evals = static_cast<int>(n + 1);
    int iter = 0;

    while (evals < max_evals) {
        ++iter;
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
        const double spread = values[worst] - values[best];
        if (diameter < options.step_tolerance ||
            (feasible(values[worst]) && spread <= 1e-14 * (1.0 + std::abs(values[best])))) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(x0.size());
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double f_reflected = f(reflected);
        ++evals;
        if (f_reflected < values[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double f_expanded = f(expanded);
            ++evals;
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                                   : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
        const double f_contracted = f(contracted);
        ++evals;
        if (f_contracted < std::min(f_reflected, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
            values[i] = f(simplex[i]);
            ++evals;
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = iter;
    return result;
}

Result minimize(const DifferentiableObjective& f, Eigen::VectorXd x0, const Options& options) {
    Result first = minimize_bfgs(f, std::move(x0), options);
    if (first.converged) return first;

    const Objective value_only = [&f](const Eigen::VectorXd& x) { return f(x, nullptr); };
    Result simplex = minimize_nelder_mead(value_only, first.x, options);
    if (!(simplex.value < first.value)) simplex = first;
    Result second = minimize_bfgs(f, simplex.x, options);
    second.iterations += first.iterations + simplex.iterations;
    if (second.value <= first.value) return second;
    first.iterations = second.iterations;
    return first;
}

}  // namespace gevcast::optim
