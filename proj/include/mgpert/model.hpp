#pragma once

// Parameter types and the change of variables that maps the symmetric
// Merton-Garman PDE onto the 2+1 dimensional heat equation.
//
// Units: all times are in years. Rates, variances and sigma^2 are 1/year,
// sigma and xi0 are year^(-1/2), xi is year^(alpha - 3/2). Prices carry the
// (opaque) currency of the spot and strike.

#include <cmath>
#include <numbers>
#include <string>

#include "mgpert/errors.hpp"

namespace mgpert {

inline constexpr double kDaysPerYear = 365.0;
/// Threshold on |R2| = |1 + sqrt(2) gamma / (sigma xi0)| below which the
/// first-order correction is undefined.
inline constexpr double kDegenerateEps = 1e-10;

enum class OptionKind { Call, Put };

inline const char* to_string(OptionKind k) { return k == OptionKind::Call ? "call" : "put"; }

/// Structural Merton-Garman parameters:
///   dS = r S dt + sqrt(V) S dW_S
///   dV = kappa (theta - V) dt + xi V^alpha dW_V,   corr(dW_S, dW_V) = rho
struct MgParams {
    double kappa = 1.5;  ///< mean-reversion speed [1/year]
    double theta = 0.08; ///< long-run variance [1/year]
    double xi = 1.5;     ///< vol-of-vol [year^(alpha-3/2)]
    double rho = -0.5;   ///< correlation, in [-1, 1]
    double alpha = 1.0;  ///< variance exponent
    double r = 0.0;      ///< risk-free rate [1/year]

    [[nodiscard]] double lambda() const noexcept { return kappa * theta; }
    [[nodiscard]] double mu() const noexcept { return -kappa; }

    void validate() const {
        detail::require(std::isfinite(kappa) && kappa > 0.0, "MgParams: kappa must be > 0");
        detail::require(std::isfinite(theta) && theta > 0.0, "MgParams: theta must be > 0");
        detail::require(std::isfinite(xi) && xi > 0.0, "MgParams: xi must be > 0");
        detail::require(std::isfinite(rho) && std::fabs(rho) <= 1.0, "MgParams: rho must lie in [-1, 1]");
        detail::require(std::isfinite(alpha) && alpha > 0.0, "MgParams: alpha must be > 0");
        detail::require(std::isfinite(r) && r >= 0.0, "MgParams: r must be >= 0");
    }

    /// Simulation also accepts xi = 0 (constant-volatility limit).
    void validate_for_simulation() const {
        MgParams p = *this;
        detail::require(std::isfinite(xi) && xi >= 0.0, "MgParams: xi must be >= 0");
        if (p.xi == 0.0) p.xi = 1.0;
        p.validate();
    }
};

/// Parameters introduced by the perturbative expansion.
struct PerturbParams {
    double sigma = 0.2; ///< averaged volatility [year^(-1/2)]
    double xi0 = 1.5;   ///< symmetric vol-of-vol [year^(-1/2)]
    double v0 = 1.0;    ///< reference variance scale in y = log(V/V0) [1/year]

    void validate() const {
        detail::require(std::isfinite(sigma) && sigma > 0.0, "PerturbParams: sigma must be > 0");
        detail::require(std::isfinite(xi0) && xi0 > 0.0, "PerturbParams: xi0 must be > 0");
        detail::require(std::isfinite(v0) && v0 > 0.0, "PerturbParams: v0 must be > 0");
    }

    /// Default linkage xi0 = xi sigma^(2(alpha-1)).
    [[nodiscard]] static PerturbParams from_mg(const MgParams& mg, double sigma, double v0 = 1.0) {
        return {sigma, mg.xi * std::pow(sigma, 2.0 * (mg.alpha - 1.0)), v0};
    }
};

/// Constants of the heat-equation reduction. All dimensionless except gamma
/// and omega [1/year].
struct DerivedParams {
    double gamma = 0.0; ///< mu - xi0^2
    double omega = 0.0; ///< r - sigma^2/2
    double eta = 0.0;   ///< 2 xi0^2 / sigma^2
    double r1 = 0.0;    ///< 2 r / sigma^2
    double r2 = 0.0;    ///< 1 + sqrt(2) gamma / (sigma xi0)
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Core of derive_params; only mu = -kappa, r and the perturbative parameters
/// enter the reduction.
inline DerivedParams derive_params(double kappa, double r, const PerturbParams& pert) {
    pert.validate();
    detail::require(std::isfinite(kappa) && kappa > 0.0, "derive_params: kappa must be > 0");
    detail::require(std::isfinite(r) && r >= 0.0, "derive_params: r must be >= 0");

    const double s2 = pert.sigma * pert.sigma;
    DerivedParams d;
    d.gamma = -kappa - pert.xi0 * pert.xi0;
    d.omega = r - 0.5 * s2;
    d.eta = 2.0 * pert.xi0 * pert.xi0 / s2;
    d.r1 = 2.0 * r / s2;
    d.r2 = 1.0 + std::numbers::sqrt2 * d.gamma / (pert.sigma * pert.xi0);
    d.a = -0.5 * (d.r1 - 1.0);
    d.b = -0.5 * (d.r2 - 1.0);
    d.c = -0.25 * ((d.r2 - 1.0) * (d.r2 - 1.0) + (d.r1 + 1.0) * (d.r1 + 1.0));

    if (!(std::isfinite(d.r2) && std::isfinite(d.c) && std::isfinite(d.r1)))
        throw DegenerateParams("derive_params: derived constants are not finite");
    if (std::fabs(d.r2) < kDegenerateEps)
        throw DegenerateParams("derive_params: |1 + sqrt(2) gamma/(sigma xi0)| < 1e-10");
    return d;
}

inline DerivedParams derive_params(const MgParams& mg, const PerturbParams& pert) {
    mg.validate();
    return derive_params(mg.kappa, mg.r, pert);
}

/// Contract description. tau_cal = T - t in years, variance is the current
/// instantaneous variance V [1/year].
struct OptionSpec {
    double spot = 100.0;
    double strike = 100.0;
    double tau_cal = 30.0 / kDaysPerYear;
    OptionKind kind = OptionKind::Call;
    double variance = 0.04;

    void validate() const {
        detail::require(std::isfinite(spot) && spot > 0.0, "OptionSpec: spot must be > 0");
        detail::require(std::isfinite(strike) && strike > 0.0, "OptionSpec: strike must be > 0");
        detail::require(std::isfinite(tau_cal) && tau_cal >= 0.0, "OptionSpec: tau_cal must be >= 0");
        detail::require(std::isfinite(variance) && variance >= 0.0, "OptionSpec: variance must be >= 0");
    }
};

struct HeatCoords {
    double x = 0.0;   ///< log(S/K)
    double y = 0.0;   ///< log(V/V0)
    double tau = 0.0; ///< sigma^2 (T - t) / 2
};

inline HeatCoords to_heat_coords(const OptionSpec& opt, const PerturbParams& pert) {
    opt.validate();
    pert.validate();
    if (!(opt.variance > 0.0))
        throw NonpositiveVariance("to_heat_coords: variance must be > 0 to form y = log(V/V0)");
    return {std::log(opt.spot / opt.strike), std::log(opt.variance / pert.v0),
            0.5 * pert.sigma * pert.sigma * opt.tau_cal};
}

/// The exponential tilt phi(x, y, tau) = exp(a x + b y + c tau), so that
/// C = K phi psi.
inline double tilt(const HeatCoords& hc, const DerivedParams& d) noexcept {
    return std::exp(d.a * hc.x + d.b * hc.y + d.c * hc.tau);
}

}  // namespace mgpert
