#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mgpert/errors.hpp"

namespace mgpert {

struct NelderMeadOptions {
    int max_iter = 500;
    double f_spread_tol = 1e-6; ///< stop when max f - min f over the simplex falls below this
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// `f` may return +inf to mark infeasible points. Vertex ties are broken by
/// index, so the search is deterministic.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    detail::require(n >= 1 && steps.size() == n, "nelder_mead: dimension mismatch");
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

    std::vector<std::size_t> order(n + 1);
    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> p2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            p2[i] = pts[order[i]];
            f2[i] = fv[order[i]];
        }
        pts.swap(p2);
        fv.swap(f2);
    };
    const auto along = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + t * (w[i] - c[i]);
        return out;
    };

    NelderMeadResult res;
    sort_simplex();
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (fv[n] - fv[0] < opt.f_spread_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);

        const auto xr = along(c, pts[n], -1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const auto xe = along(c, pts[n], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                pts[n] = xe;
                fv[n] = fe;
            } else {
                pts[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            pts[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const auto xc = outside ? along(c, pts[n], -0.5) : along(c, pts[n], 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[n])) {
                pts[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    pts[i] = along(pts[0], pts[i], 0.5);
                    fv[i] = f(pts[i]);
                }
            }
        }
        sort_simplex();
    }
    if (!res.converged && fv[n] - fv[0] < opt.f_spread_tol) res.converged = true;
    res.x = pts[0];
    res.f = fv[0];
    res.iterations = it;
    return res;
}

}  // namespace mgpert
