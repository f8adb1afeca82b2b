#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "ehypo/common.hpp"

namespace ehypo::opt {

struct Options {
    int max_iterations = 2000;
    double objective_tolerance = 1e-10;
    double gradient_tolerance = 1e-6;
};

struct Result {
    std::vector<double> x;
    double value = inf;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Central finite-difference gradient with per-coordinate steps.
inline std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x) {
    std::vector<double> g(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Nelder-Mead simplex descent with the standard reflection / expansion /
// contraction / shrink moves. Deterministic for a given starting point.
// `trace`, when provided, records each accepted improvement of the best value.
inline Result nelder_mead(const Objective& f, const std::vector<double>& x0,
                          const Options& opts, std::vector<double>* trace = nullptr) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += 0.25 * std::max(0.25, std::abs(x0[i]));
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    sort_simplex();
    double best_seen = fv[order[0]];
    if (trace) trace->push_back(best_seen);

    Result res;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        sort_simplex();
        const std::size_t ibest = order[0];
        const std::size_t iworst = order[n];
        const std::size_t isecond = order[n > 0 ? n - 1 : 0];
        if (fv[ibest] < best_seen) {
            best_seen = fv[ibest];
            if (trace) trace->push_back(best_seen);
        }
        const double spread = std::abs(fv[iworst] - fv[ibest]);
        if (spread <= opts.objective_tolerance * (1.0 + std::abs(fv[ibest]))) {
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t j = 0; j <= n; ++j) {
            if (j == iworst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        const auto blend = [&](double scale) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = centroid[i] + scale * (centroid[i] - simplex[iworst][i]);
            }
            return p;
        };

        std::vector<double> reflected = blend(1.0);
        const double fr = f(reflected);
        if (fr < fv[ibest]) {
            std::vector<double> expanded = blend(2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[iworst] = std::move(expanded);
                fv[iworst] = fe;
            } else {
                simplex[iworst] = std::move(reflected);
                fv[iworst] = fr;
            }
        } else if (fr < fv[isecond]) {
            simplex[iworst] = std::move(reflected);
            fv[iworst] = fr;
        } else {
            const bool outside = fr < fv[iworst];
            std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
            const double fc = f(contracted);
            if (fc < (outside ? fr : fv[iworst])) {
                simplex[iworst] = std::move(contracted);
                fv[iworst] = fc;
            } else {
                for (std::size_t j = 0; j <= n; ++j) {
                    if (j == order[0]) continue;
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[j][i] =
                            simplex[order[0]][i] + 0.5 * (simplex[j][i] - simplex[order[0]][i]);
                    }
                    fv[j] = f(simplex[j]);
                }
            }
        }
    }
    sort_simplex();
    if (fv[order[0]] < best_seen && trace) trace->push_back(fv[order[0]]);
    res.x = simplex[order[0]];
    res.value = fv[order[0]];
    res.iterations = it;
    res.converged = it < opts.max_iterations;
    return res;
}

// BFGS with finite-difference gradients and a backtracking line search.
// Converged means both the objective change and the gradient norm passed
// below their tolerances.
inline Result bfgs(const Objective& f, const std::vector<double>& x0,
                   const Options& opts, std::vector<double>* trace = nullptr) {
    const std::size_t n = x0.size();
    std::vector<double> x = x0;
    double fx = f(x);
    if (trace) trace->push_back(fx);
    std::vector<double> g = fd_gradient(f, x);

    // inverse Hessian approximation, row-major identity
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;

    Result res;
    res.x = x;
    res.value = fx;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (norm2(g) <= opts.gradient_tolerance) {
            res.converged = true;
            break;
        }
        std::vector<double> dir(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) dir[i] -= h[i * n + j] * g[j];
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
        if (slope >= 0.0) {
            // stale curvature; restart from steepest descent
            std::fill(h.begin(), h.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
            for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = -norm2(g) * norm2(g);
        }

        double step = 1.0;
        std::vector<double> x_new(n);
        double f_new = inf;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
            f_new = f(x_new);
            if (f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        std::vector<double> g_new = fd_gradient(f, x_new);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) sy += s[i] * y[i];
        if (sy > 1e-14) {
            // BFGS inverse update: H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) hy[i] += h[i * n + j] * y[j];
            }
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    h[i * n + j] += (sy + yhy) * s[i] * s[j] / (sy * sy) -
                                    (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }

        const double drop = fx - f_new;
        x = x_new;
        fx = f_new;
        g = std::move(g_new);
        if (trace) trace->push_back(fx);
        if (drop >= 0.0 && drop <= opts.objective_tolerance &&
            norm2(g) <= opts.gradient_tolerance) {
            ++it;
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.value = fx;
    res.iterations = it;
    return res;
}

} // namespace ehypo::opt
