#pragma once

// Closed-form pricing: the symmetric solution (identical to Black-Scholes with
// volatility sigma), the leading-order correction C1 = P1, and implied
// volatility inversion.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mgpert/errors.hpp"
#include "mgpert/model.hpp"
#include "mgpert/normal.hpp"

namespace mgpert {

struct PriceBreakdown {
    double c0 = 0.0;
    double c1 = 0.0;
    double total = 0.0; ///< c0 + c1
    double d1 = 0.0;
    double d2 = 0.0;
};

inline double payoff(OptionKind kind, double spot, double strike) noexcept {
    return kind == OptionKind::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
}

struct BsArgs {
    double d1;
    double d2;
};

/// d1, d2 for volatility sigma. At tau = 0 they degenerate to +-inf (or 0 ATM).
inline BsArgs bs_args(double spot, double strike, double tau, double r, double sigma) noexcept {
    const double x = std::log(spot / strike);
    if (tau <= 0.0) {
        const double lim = x > 0.0 ? INFINITY : (x < 0.0 ? -INFINITY : 0.0);
        return {lim, lim};
    }
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (x + (r + 0.5 * sigma * sigma) * tau) / sd;
    return {d1, d1 - sd};
}

/// Black-Scholes price with volatility sigma; exact payoff at tau = 0.
/// Puts are priced through parity, P = C - S + K e^{-r tau}.
inline double black_scholes(OptionKind kind, double spot, double strike, double tau, double r,
                             double sigma) noexcept {
    if (tau <= 0.0) return payoff(kind, spot, strike);
    const auto [d1, d2] = bs_args(spot, strike, tau, r, sigma);
    const double df = std::exp(-r * tau);
    const double call = spot * normal_cdf(d1) - strike * df * normal_cdf(d2);
    return kind == OptionKind::Call ? call : call - spot + strike * df;
}

inline double bs_vega(double spot, double strike, double tau, double r, double sigma) noexcept {
    if (tau <= 0.0) return 0.0;
    return spot * normal_pdf(bs_args(spot, strike, tau, r, sigma).d1) * std::sqrt(tau);
}

/// C0 / P0: the exact solution of the symmetric model.
inline double price_symmetric(const OptionSpec& opt, const PerturbParams& pert, double r) {
    opt.validate();
    detail::require(opt.tau_cal == 0.0 || (std::isfinite(pert.sigma) && pert.sigma > 0.0),
                    "price_symmetric: sigma must be > 0 when tau_cal > 0");
    return black_scholes(opt.kind, opt.spot, opt.strike, opt.tau_cal, r, pert.sigma);
}

/// Leading-order correction C1 (= P1) in the original variables,
///
///   C1 = -K (S/K)^{1/2 - r/sigma^2} exp(-(x^2 + (r + sigma^2/2)^2 T^2) / (2 sigma^2 T))
///        / (2 sqrt(2 pi) R2 sqrt(sigma^2 T))
///        * (sigma^4 R2 (-T) / 2 + V (exp(sigma^2 R2 T / 2) - 1)),
///
/// with T = tau_cal, x = log(S/K), R2 = 1 + sqrt(2) gamma/(sigma xi0). This is
/// K phi psi1 for the Green's-function solution psi1. The magnitude is built in
/// log space so extreme moneyness cannot overflow (S/K)^{1/2 - r/sigma^2}.
/// Returns 0 at tau_cal = 0 (continuous limit).
inline double perturb_correction(const OptionSpec& opt, const PerturbParams& pert,
                                 const DerivedParams& deriv, double r) {
    opt.validate();
    pert.validate();
    if (std::fabs(deriv.r2) < kDegenerateEps || !std::isfinite(deriv.r2))
        throw DegenerateParams("perturb_correction: degenerate R2");
    const double t = opt.tau_cal;
    if (t == 0.0) return 0.0;

    const double s2 = pert.sigma * pert.sigma;
    const double x = std::log(opt.spot / opt.strike);
    const double drift = r + 0.5 * s2;
    const double log_mag = std::log(opt.strike) + (0.5 - r / s2) * x -
                           (x * x + drift * drift * t * t) / (2.0 * s2 * t) -
                           std::log(2.0 * std::sqrt(2.0 * std::numbers::pi) * std::fabs(deriv.r2)) -
                           0.5 * std::log(s2 * t);
    const double bracket =
        -0.5 * s2 * s2 * deriv.r2 * t + opt.variance * std::expm1(0.5 * s2 * deriv.r2 * t);
    const double sign = deriv.r2 > 0.0 ? -1.0 : 1.0;
    return sign * std::exp(log_mag) * bracket;
}

/// Variance at which the C1 bracket vanishes; C1 changes sign across it.
inline double c1_bracket_root(double sigma, double r2, double tau_cal) {
    const double s2 = sigma * sigma;
    return s2 * s2 * r2 * tau_cal / (2.0 * std::expm1(0.5 * s2 * r2 * tau_cal));
}

/// Full leading-order Merton-Garman price C0 + C1 (or P0 + P1).
inline PriceBreakdown price_mg(const OptionSpec& opt, const MgParams& mg, const PerturbParams& pert) {
    mg.validate();
    const DerivedParams deriv = derive_params(mg, pert);
    PriceBreakdown out;
    out.c0 = price_symmetric(opt, pert, mg.r);
    out.c1 = perturb_correction(opt, pert, deriv, mg.r);
    out.total = out.c0 + out.c1;
    const auto [d1, d2] = bs_args(opt.spot, opt.strike, opt.tau_cal, mg.r, pert.sigma);
    out.d1 = d1;
    out.d2 = d2;
    return out;
}

/// Lower and upper no-arbitrage bounds of a European option price.
struct PriceBounds {
    double lower;
    double upper;
};

inline PriceBounds no_arbitrage_bounds(OptionKind kind, double spot, double strike, double tau,
                                       double r) noexcept {
    const double kdf = strike * std::exp(-r * tau);
    if (kind == OptionKind::Call) return {std::max(spot - kdf, 0.0), spot};
    return {std::max(kdf - spot, 0.0), kdf};
}

struct ImpliedVolConfig {
    double lo = 1e-4;
    double hi = 5.0;
    double price_tol = 1e-9;
    int max_iter = 100;
};

/// Black-Scholes implied volatility: safeguarded Newton on vega inside the
/// hard bracket [lo, hi], falling back to bisection whenever a Newton step
/// leaves the current bracket or vega underflows.
inline double implied_vol(double price, const OptionSpec& opt, double r,
                          const ImpliedVolConfig& cfg = {}) {
    opt.validate();
    detail::require(opt.tau_cal > 0.0, "implied_vol: tau_cal must be > 0");
    detail::require(std::isfinite(price), "implied_vol: price must be finite");
    const auto [lower, upper] = no_arbitrage_bounds(opt.kind, opt.spot, opt.strike, opt.tau_cal, r);
    if (!(price > lower && price < upper))
        throw OutOfBounds("implied_vol: price outside the no-arbitrage bracket");

    const auto f = [&](double s) {
        return black_scholes(opt.kind, opt.spot, opt.strike, opt.tau_cal, r, s) - price;
    };
    double lo = cfg.lo, hi = cfg.hi;
    const double f_lo = f(lo), f_hi = f(hi);
    if (f_lo > 0.0 || f_hi < 0.0)
        throw NoConvergence("implied_vol: price not attainable for sigma in [1e-4, 5]");

    // Start from the Brenner-Subrahmanyam ATM guess, clipped into the bracket.
    double s = std::clamp(std::sqrt(2.0 * std::numbers::pi / opt.tau_cal) * price / opt.spot,
                          lo * 2.0, hi * 0.5);
    for (int it = 0; it < cfg.max_iter; ++it) {
        const double fs = f(s);
        if (fs > 0.0) hi = s; else lo = s;
        const double vega = bs_vega(opt.spot, opt.strike, opt.tau_cal, r, s);
        double next = vega > 1e-300 ? s - fs / vega : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::fabs(next - s);
        s = next;
        if (std::fabs(fs) <= cfg.price_tol && step <= 1e-12 * (1.0 + s)) return s;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return s;
    }
    if (std::fabs(f(s)) <= cfg.price_tol) return s;
    throw NoConvergence("implied_vol: iteration cap reached");
}

}  // namespace mgpert
