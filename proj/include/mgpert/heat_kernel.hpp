#pragma once

// Verification machinery in heat coordinates (x, y, tau):
//   psi0             exact solution of d_tau psi = psi_xx + psi_yy for the call
//   heat_green       the 2+1 Gaussian propagator
//   breaking_terms   the four symmetry-breaking operator terms applied to psi0
//   psi1_quadrature  psi1 = -int_0^tau dt int int G D psi0, by tensor Gauss-Legendre
//
// Nothing here calls the closed-form C1 of analytic.hpp; the two routes only
// meet in the tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mgpert/errors.hpp"
#include "mgpert/gauss_legendre.hpp"
#include "mgpert/model.hpp"
#include "mgpert/normal.hpp"
#include "mgpert/parallel.hpp"

namespace mgpert {

struct Psi0Eval {
    double value = 0.0;
    double x = 0.0;
    double y = 0.0;
    double tau = 0.0;
};

/// Call boundary function psi0(x, y, 0) = e^{(R2-1)y/2} (e^{(R1+1)x/2} - e^{(R1-1)x/2})^+.
inline double psi0_boundary(double x, double y, const DerivedParams& d) noexcept {
    if (x <= 0.0) return 0.0;
    return std::exp(0.5 * (d.r2 - 1.0) * y) *
           (std::exp(0.5 * (d.r1 + 1.0) * x) - std::exp(0.5 * (d.r1 - 1.0) * x));
}

inline double psi0_value(double x, double y, double tau, const DerivedParams& d) noexcept {
    if (tau <= 0.0) return psi0_boundary(x, y, d);
    const double s = std::sqrt(2.0 * tau);
    const double d1 = x / s + 0.5 * s * (d.r1 + 1.0);
    const double d2 = x / s + 0.5 * s * (d.r1 - 1.0);
    const double yfac = 0.5 * (d.r2 - 1.0) * (0.5 * tau * (d.r2 - 1.0) + y);
    const double up = 0.5 * (d.r1 + 1.0) * x + 0.25 * (d.r1 + 1.0) * (d.r1 + 1.0) * tau;
    const double dn = 0.5 * (d.r1 - 1.0) * x + 0.25 * (d.r1 - 1.0) * (d.r1 - 1.0) * tau;
    const double v = std::exp(yfac + up) * normal_cdf(d1) - std::exp(yfac + dn) * normal_cdf(d2);
    return std::max(v, 0.0);
}

inline Psi0Eval psi0(const HeatCoords& hc, const DerivedParams& d) {
    detail::require(hc.tau >= 0.0 && std::isfinite(hc.x) && std::isfinite(hc.y), "psi0: invalid coordinates");
    return {psi0_value(hc.x, hc.y, hc.tau, d), hc.x, hc.y, hc.tau};
}

/// G(x, y, tau; x', y', t), zero unless tau > t.
inline double heat_green(double x, double y, double tau, double xp, double yp, double t) noexcept {
    const double s = tau - t;
    if (s <= 0.0) return 0.0;
    const double dx = x - xp, dy = y - yp;
    return std::exp(-(dx * dx + dy * dy) / (4.0 * s)) / (4.0 * std::numbers::pi * s);
}

struct BreakingFlags {
    bool c1 = true;
    bool c2 = true;
    bool c3 = true;
    bool c4 = true;

    static constexpr BreakingFlags all() { return {true, true, true, true}; }
    static constexpr BreakingFlags only_c1() { return {true, false, false, false}; }
};

/// How derivatives of psi0 are formed. Factorized uses d_y psi0 = -b psi0
/// exactly and central differences in x; FiniteDifference differences both axes.
enum class DerivativeMode { Factorized, FiniteDifference };

struct BreakingTerms {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;

    [[nodiscard]] double sum(BreakingFlags f) const noexcept {
        return (f.c1 ? c1 : 0.0) + (f.c2 ? c2 : 0.0) + (f.c3 ? c3 : 0.0) + (f.c4 ? c4 : 0.0);
    }
};

/// Each symmetry-breaking term of D(x, y) applied to psi0 at (x, y, tau):
///   c1: (V0 e^y - sigma^2)/2 ((a^2 - a) + (2a - 1) d_x + d_xx)
///   c2: (lambda/V0) e^{-y} (d_y + b)
///   c3: (xi^2 V0^{2alpha-2} e^{(2alpha-2)y} - xi0^2) ((b^2 - b) + (2b - 1) d_y + d_yy)
///   c4: xi rho V0^{alpha-1/2} e^{(alpha-1/2)y} (ab + b d_x + a d_y + d_xy)
/// The c3 and c4 brackets are grouped around (d_y + b), i.e.
/// (b - 1)(d_y + b) + d_y(d_y + b) and a(d_y + b) + d_x(d_y + b).
inline BreakingTerms breaking_terms(const HeatCoords& hc, const MgParams& mg, const PerturbParams& pert,
                                    const DerivedParams& d, double h = 1e-4,
                                    DerivativeMode mode = DerivativeMode::Factorized) {
    const double x = hc.x, y = hc.y, tau = hc.tau;
    const auto f = [&](double xx, double yy) { return psi0_value(xx, yy, tau, d); };
    const double p = f(x, y);
    const double pxp = f(x + h, y), pxm = f(x - h, y);
    const double px = (pxp - pxm) / (2.0 * h);
    const double pxx = (pxp - 2.0 * p + pxm) / (h * h);
    double py, pyy, pxy;
    if (mode == DerivativeMode::Factorized) {
        py = -d.b * p;
        pyy = d.b * d.b * p;
        pxy = -d.b * px;
    } else {
        const double pyp = f(x, y + h), pym = f(x, y - h);
        py = (pyp - pym) / (2.0 * h);
        pyy = (pyp - 2.0 * p + pym) / (h * h);
        pxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    }
    const double v0 = pert.v0;
    BreakingTerms t;
    t.c1 = 0.5 * (v0 * std::exp(y) - pert.sigma * pert.sigma) *
           ((d.a * d.a - d.a) * p + (2.0 * d.a - 1.0) * px + pxx);
    t.c2 = mg.lambda() / v0 * std::exp(-y) * (py + d.b * p);
    t.c3 = (mg.xi * mg.xi * std::pow(v0, 2.0 * mg.alpha - 2.0) * std::exp((2.0 * mg.alpha - 2.0) * y) -
            pert.xi0 * pert.xi0) *
           ((d.b - 1.0) * (d.b * p + py) + (d.b * py + pyy));
    t.c4 = mg.xi * mg.rho * std::pow(v0, mg.alpha - 0.5) * std::exp((mg.alpha - 0.5) * y) *
           (d.a * (d.b * p + py) + (d.b * px + pxy));
    return t;
}

inline double apply_breaking_operator(const HeatCoords& hc, const MgParams& mg, const PerturbParams& pert,
                                      const DerivedParams& d, BreakingFlags flags, double h = 1e-4,
                                      DerivativeMode mode = DerivativeMode::Factorized) {
    return breaking_terms(hc, mg, pert, d, h, mode).sum(flags);
}

/// Closed-form first-order solution (c1 = 1):
///   psi1 = (sigma^2 tau (sqrt2 gamma + sigma xi0) - sigma xi0 V0 e^y (e^{R2 tau} - 1))
///          exp((R2-1)^2 tau/4 - x^2/(4 tau) + gamma y/(sqrt2 sigma xi0))
///          / (4 sqrt(pi tau) (sqrt2 gamma + sigma xi0))
inline double psi1_closed_form(const HeatCoords& hc, const PerturbParams& pert, const DerivedParams& d) {
    if (hc.tau <= 0.0) return 0.0;
    const double tau = hc.tau;
    const double sx = pert.sigma * pert.xi0;
    const double g = std::numbers::sqrt2 * d.gamma + sx;
    const double num = pert.sigma * pert.sigma * tau * g - sx * pert.v0 * std::exp(hc.y) * std::expm1(d.r2 * tau);
    const double expo = 0.25 * (d.r2 - 1.0) * (d.r2 - 1.0) * tau - hc.x * hc.x / (4.0 * tau) +
                        d.gamma * hc.y / (std::numbers::sqrt2 * sx);
    return num * std::exp(expo) / (4.0 * std::sqrt(std::numbers::pi * tau) * g);
}

struct QuadratureConfig {
    double half_width_sigmas = 8.0; ///< spatial half-width in kernel std devs sqrt(2(tau - t))
    int nodes_x = 128;              ///< x' nodes over the base panels (8 panels)
    int nodes_y = 128;
    int time_slices = 64;
    double fd_step = 1e-4;          ///< finite-difference step for psi0 derivatives
    int refinements = 1;            ///< extra levels, each doubling every node count
    double rel_tol = 1e-4;          ///< successive levels must agree to rel_tol * int |integrand|
    bool grade_kink = true;         ///< add panels graded around the payoff kink x' = 0
    unsigned threads = 1;

    void validate() const {
        detail::require(half_width_sigmas >= 6.0, "QuadratureConfig: half-width must be >= 6 kernel std devs");
        detail::require(nodes_x >= 4 && nodes_y >= 4, "QuadratureConfig: node counts must be >= 4");
        detail::require(time_slices >= 4, "QuadratureConfig: time slices must be >= 4");
        detail::require(fd_step >= 1e-6 && fd_step <= 1e-3, "QuadratureConfig: fd_step must lie in [1e-6, 1e-3]");
        detail::require(refinements >= 0 && refinements <= 4, "QuadratureConfig: refinements must lie in [0, 4]");
        detail::require(rel_tol > 0.0, "QuadratureConfig: rel_tol must be > 0");
    }
};

namespace detail {

inline constexpr int kBasePanels = 8;

/// x' nodes/weights for one time slice: kBasePanels equal panels over
/// [centre - half, centre + half], optionally split further at the kink x' = 0
/// and at +-width * 2^j so the psi0 derivatives (width ~ sqrt(2t)) are resolved.
inline void x_axis(double centre, double half, double kink_width, int per_panel, bool grade,
                   const GaussLegendreRule& rule, std::vector<double>& xs, std::vector<double>& ws) {
    (void)per_panel;
    const double lo = centre - half, hi = centre + half;
    std::vector<double> cuts;
    for (int k = 0; k <= kBasePanels; ++k) cuts.push_back(lo + (hi - lo) * k / kBasePanels);
    if (grade && kink_width > 0.0 && lo < 0.0 && hi > 0.0) {
        cuts.push_back(0.0);
        for (double w = kink_width; w < hi - lo; w *= 2.0) {
            if (-w > lo) cuts.push_back(-w);
            if (w < hi) cuts.push_back(w);
        }
    } else if (grade && kink_width > 0.0) {
        // Kink outside the window: grade towards the nearer edge instead.
        const double edge = hi <= 0.0 ? hi : lo;
        const double dir = hi <= 0.0 ? -1.0 : 1.0;
        for (double w = kink_width; w < hi - lo; w *= 2.0) {
            const double c = edge + dir * (w - std::fabs(edge));
            if (c > lo && c < hi) cuts.push_back(c);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double u, double v) { return std::fabs(u - v) <= 1e-14 * (hi - lo); }),
               cuts.end());
    xs.clear();
    ws.clear();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) append_mapped(rule, cuts[i], cuts[i + 1], xs, ws);
}

struct LevelResult {
    double value = 0.0;
    double l1 = 0.0; ///< integral of |integrand|, the convergence scale
};

template <class Integrand>
LevelResult psi1_level(const HeatCoords& hc, const QuadratureConfig& cfg, int level, Integrand&& integrand) {
    const int scale = 1 << level;
    const int per_panel = std::max(1, cfg.nodes_x / kBasePanels) * scale;
    const GaussLegendreRule rule_x = gauss_legendre(static_cast<std::size_t>(per_panel));
    const GaussLegendreRule rule_y = gauss_legendre(static_cast<std::size_t>(cfg.nodes_y * scale));
    const GaussLegendreRule rule_t = gauss_legendre(static_cast<std::size_t>(cfg.time_slices * scale));
    const std::size_t nt = rule_t.size();
    std::vector<double> slice(nt), slice_abs(nt);
    const double tau = hc.tau;

    parallel_for(nt, cfg.threads, [&](std::size_t k) {
        const double t = 0.5 * tau * (rule_t.nodes[k] + 1.0);
        const double s = tau - t;
        const double half = cfg.half_width_sigmas * std::sqrt(2.0 * s);
        std::vector<double> xs, wx, ys, wy;
        x_axis(hc.x, half, std::sqrt(2.0 * t), per_panel, cfg.grade_kink, rule_x, xs, wx);
        append_mapped(rule_y, hc.y - half, hc.y + half, ys, wy);
        std::vector<double> row(ys.size()), row_abs(ys.size()), col(xs.size()), col_abs(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = 0; j < ys.size(); ++j) {
                const double v = wy[j] * heat_green(hc.x, hc.y, tau, xs[i], ys[j], t) * integrand(xs[i], ys[j], t);
                row[j] = v;
                row_abs[j] = std::fabs(v);
            }
            col[i] = wx[i] * pairwise_sum(row);
            col_abs[i] = wx[i] * pairwise_sum(row_abs);
        }
        const double w = 0.5 * tau * rule_t.weights[k];
        slice[k] = w * pairwise_sum(col);
        slice_abs[k] = w * pairwise_sum(col_abs);
    });
    return {-pairwise_sum(slice), pairwise_sum(slice_abs)};
}

}  // namespace detail

struct Psi1Quadrature {
    double value = 0.0;           ///< finest level
    std::vector<double> levels;   ///< value at each refinement level
    double scale = 0.0;           ///< int |G D psi0| on the finest level
};

/// psi1(x, y, tau) = -int_0^tau dt int int G(x, y, tau; x', y', t) D psi0(x', y', t) dx' dy'.
/// Computes levels 0..refinements (each doubling all node counts) and throws
/// QuadratureNotConverged when the last two differ by more than rel_tol * scale.
inline Psi1Quadrature psi1_quadrature(const HeatCoords& hc, const MgParams& mg, const PerturbParams& pert,
                                      const DerivedParams& d, const QuadratureConfig& cfg,
                                      BreakingFlags flags = BreakingFlags::only_c1(),
                                      DerivativeMode mode = DerivativeMode::Factorized) {
    cfg.validate();
    detail::require(hc.tau > 0.0, "psi1_quadrature: tau must be > 0");
    const auto integrand = [&](double xp, double yp, double t) {
        return apply_breaking_operator({xp, yp, t}, mg, pert, d, flags, cfg.fd_step, mode);
    };
    Psi1Quadrature out;
    for (int level = 0; level <= cfg.refinements; ++level) {
        const auto r = detail::psi1_level(hc, cfg, level, integrand);
        out.levels.push_back(r.value);
        out.value = r.value;
        out.scale = r.l1;
    }
    if (out.levels.size() >= 2) {
        const double diff = std::fabs(out.levels.back() - out.levels[out.levels.size() - 2]);
        if (!(diff <= cfg.rel_tol * out.scale))
            throw QuadratureNotConverged("psi1_quadrature: successive refinements differ by " +
                                         std::to_string(diff / out.scale) + " (relative to the L1 scale)");
    }
    return out;
}

/// Folds the call boundary function with G: reconstructs psi0(x, y, tau) from
/// its tau = 0 data. The X integral starts at the kink X = 0, so each piece is smooth.
inline double reconstruct_psi0(const HeatCoords& hc, const DerivedParams& d, const QuadratureConfig& cfg) {
    cfg.validate();
    detail::require(hc.tau > 0.0, "reconstruct_psi0: tau must be > 0");
    const double half = cfg.half_width_sigmas * std::sqrt(2.0 * hc.tau);
    const double xlo = std::max(0.0, hc.x - half), xhi = hc.x + half;
    if (xhi <= xlo) return 0.0;
    const GaussLegendreRule rx = gauss_legendre(static_cast<std::size_t>(std::max(1, cfg.nodes_x / detail::kBasePanels)));
    const GaussLegendreRule ry = gauss_legendre(static_cast<std::size_t>(cfg.nodes_y));
    std::vector<double> xs, wx, ys, wy;
    for (int k = 0; k < detail::kBasePanels; ++k)
        append_mapped(rx, xlo + (xhi - xlo) * k / detail::kBasePanels,
                      xlo + (xhi - xlo) * (k + 1) / detail::kBasePanels, xs, wx);
    append_mapped(ry, hc.y - half, hc.y + half, ys, wy);
    std::vector<double> col(xs.size()), row(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j)
            row[j] = wy[j] * psi0_boundary(xs[i], ys[j], d) * heat_green(hc.x, hc.y, hc.tau, xs[i], ys[j], 0.0);
        col[i] = wx[i] * pairwise_sum(row);
    }
    return pairwise_sum(col);
}

/// Central-difference (d_tau - d_xx - d_yy) f at hc, with spatial step h and time step ht.
template <class Field>
double heat_operator_fd(Field&& f, const HeatCoords& hc, double h, double ht) {
    const double x = hc.x, y = hc.y, t = hc.tau;
    const double c = f(x, y, t);
    const double dt = (f(x, y, t + ht) - f(x, y, t - ht)) / (2.0 * ht);
    const double dxx = (f(x + h, y, t) - 2.0 * c + f(x - h, y, t)) / (h * h);
    const double dyy = (f(x, y + h, t) - 2.0 * c + f(x, y - h, t)) / (h * h);
    return dt - dxx - dyy;
}

/// Homogeneous residual of psi0.
inline double heat_residual_psi0(const HeatCoords& hc, const DerivedParams& d, double h, double ht) {
    detail::require(hc.tau > ht, "heat_residual: interior point needs tau > ht");
    return heat_operator_fd([&](double x, double y, double t) { return psi0_value(x, y, t, d); }, hc, h, ht);
}

/// Residual of the closed-form psi1 against its source:
/// (d_tau - d_xx - d_yy) psi1 + D_c1 psi0.
inline double heat_residual_psi1(const HeatCoords& hc, const MgParams& mg, const PerturbParams& pert,
                                 const DerivedParams& d, double h, double ht, double fd_step = 1e-5) {
    detail::require(hc.tau > ht, "heat_residual: interior point needs tau > ht");
    const double lhs = heat_operator_fd(
        [&](double x, double y, double t) { return psi1_closed_form({x, y, t}, pert, d); }, hc, h, ht);
    return lhs + apply_breaking_operator(hc, mg, pert, d, BreakingFlags::only_c1(), fd_step);
}

/// One row of the oracle CSV export.
struct OracleRow {
    double x = 0.0;
    double y = 0.0;
    double tau = 0.0;
    double psi0 = 0.0;
    double psi1_quad = 0.0;
    double c1_closed_form = 0.0; ///< currency
    double abs_err = 0.0;        ///< |K phi psi1_quad - c1_closed_form|, currency
};

}  // namespace mgpert
