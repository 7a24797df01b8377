#pragma once

// IVRMSE objective, calibration of (kappa, xi, alpha, sigma), and the two
// experiment drivers: a static 30-day cross-section and a simulated weekly
// time series.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mgpert/analytic.hpp"
#include "mgpert/errors.hpp"
#include "mgpert/gauss_legendre.hpp"
#include "mgpert/model.hpp"
#include "mgpert/monte_carlo.hpp"
#include "mgpert/nelder_mead.hpp"
#include "mgpert/parallel.hpp"

namespace mgpert {

/// Residual assigned to a quote whose model price has no implied volatility.
inline constexpr double kIvFailureResidual = 0.5;

struct Quote {
    OptionSpec opt;
    double price = 0.0; ///< observed price [currency]
    double iv = 0.0;    ///< observed implied volatility
};

struct QuoteSet {
    std::vector<Quote> quotes;
    double r = 0.0;
    double timestamp = 0.0; ///< years
    std::size_t dropped = 0; ///< quotes removed because their IV did not exist

    [[nodiscard]] std::size_t size() const noexcept { return quotes.size(); }
};

/// Builds a quote set from observed prices; quotes outside the no-arbitrage
/// bracket or without an IV in [1e-4, 5] are dropped and counted.
inline QuoteSet make_quote_set(const std::vector<std::pair<OptionSpec, double>>& priced, double r,
                               double timestamp = 0.0) {
    QuoteSet qs;
    qs.r = r;
    qs.timestamp = timestamp;
    for (const auto& [opt, price] : priced) {
        try {
            qs.quotes.push_back({opt, price, implied_vol(price, opt, r)});
        } catch (const OutOfBounds&) {
            ++qs.dropped;
        } catch (const NoConvergence&) {
            ++qs.dropped;
        }
    }
    return qs;
}

/// Theta^pert = (kappa, xi, alpha, sigma). xi0 follows the linkage xi sigma^(2(alpha-1)).
struct PertTheta {
    double kappa = 1.5;
    double xi = 1.5;
    double alpha = 1.0;
    double sigma = 0.2;

    void validate() const {
        detail::require(std::isfinite(kappa) && kappa > 0.0, "PertTheta: kappa must be > 0");
        detail::require(std::isfinite(xi) && xi > 0.0, "PertTheta: xi must be > 0");
        detail::require(std::isfinite(alpha) && alpha > 0.0, "PertTheta: alpha must be > 0");
        detail::require(std::isfinite(sigma) && sigma > 0.0, "PertTheta: sigma must be > 0");
    }
};

/// Leading-order price C0 + C1 for the calibration parameterization.
inline double model_price(const OptionSpec& opt, const PertTheta& th, double r) {
    const PerturbParams pert{th.sigma, th.xi * std::pow(th.sigma, 2.0 * (th.alpha - 1.0)), 1.0};
    const DerivedParams d = derive_params(th.kappa, r, pert);
    return black_scholes(opt.kind, opt.spot, opt.strike, opt.tau_cal, r, th.sigma) +
           perturb_correction(opt, pert, d, r);
}

/// Per-quote residuals IV_obs - IV_model (kIvFailureResidual where the model IV fails).
inline std::vector<double> iv_residuals(const QuoteSet& qs, const PertTheta& th) {
    if (qs.quotes.empty()) throw EmptyQuoteSet("ivrmse: quote set is empty");
    th.validate();
    std::vector<double> res;
    res.reserve(qs.size());
    for (const Quote& q : qs.quotes) {
        const double p = model_price(q.opt, th, qs.r);
        double iv_model = std::numeric_limits<double>::quiet_NaN();
        try {
            iv_model = implied_vol(p, q.opt, qs.r);
        } catch (const OutOfBounds&) {
        } catch (const NoConvergence&) {
        }
        res.push_back(std::isfinite(iv_model) ? q.iv - iv_model : kIvFailureResidual);
    }
    return res;
}

/// Root mean square; squares are summed in sorted order so the value does not
/// depend on quote order.
inline double rms(std::vector<double> r) {
    for (double& x : r) x *= x;
    std::sort(r.begin(), r.end());
    double s = 0.0;
    for (double x : r) s += x;
    return std::sqrt(s / static_cast<double>(r.size()));
}

inline double ivrmse(const QuoteSet& qs, const PertTheta& th) { return rms(iv_residuals(qs, th)); }

struct CalibResult {
    PertTheta theta;
    double ivrmse = 0.0;
    double ivrmse_initial = 0.0;
    std::size_t n_quotes_used = 0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> residuals;
};

struct CalibOptions {
    NelderMeadOptions nm{};
    bool restart = true;
};

namespace detail {

inline constexpr double kLogBound = 20.0;

/// Objective on z = (log kappa, log xi, alpha, log sigma); +inf outside the
/// feasible region or where the expansion is degenerate.
inline double calib_objective(const QuoteSet& qs, const std::vector<double>& z) {
    if (!(z[2] > 0.0) || std::fabs(z[0]) > kLogBound || std::fabs(z[1]) > kLogBound ||
        std::fabs(z[3]) > kLogBound || !std::isfinite(z[2]))
        return std::numeric_limits<double>::infinity();
    try {
        const double v = ivrmse(qs, {std::exp(z[0]), std::exp(z[1]), z[2], std::exp(z[3])});
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const DegenerateParams&) {
        return std::numeric_limits<double>::infinity();
    }
}

inline CalibResult finish(const QuoteSet& qs, const PertTheta& th, double f0, int iters, bool conv) {
    CalibResult out;
    out.theta = th;
    out.residuals = iv_residuals(qs, th);
    out.ivrmse = rms(out.residuals);
    out.ivrmse_initial = f0;
    out.n_quotes_used = qs.size();
    out.iterations = iters;
    out.converged = conv;
    out.status = conv ? "converged" : "no_improvement";
    return out;
}

}  // namespace detail

/// Nelder-Mead on (log kappa, log xi, alpha, log sigma), restarted once from
/// the best vertex. Returns the best point found; converged = false when the
/// simplex spread never fell below tolerance.
inline CalibResult calibrate(const QuoteSet& qs, const PertTheta& initial, const CalibOptions& opt = {}) {
    if (qs.quotes.empty()) throw EmptyQuoteSet("calibrate: quote set is empty");
    initial.validate();
    const auto f = [&](const std::vector<double>& z) { return detail::calib_objective(qs, z); };
    std::vector<double> z0{std::log(initial.kappa), std::log(initial.xi), initial.alpha, std::log(initial.sigma)};
    const double f0 = f(z0);
    const std::vector<double> steps{0.5, 0.5, 0.25, 0.1};
    NelderMeadResult r = nelder_mead(f, z0, steps, opt.nm);
    int iters = r.iterations;
    if (opt.restart) {
        const NelderMeadResult r2 = nelder_mead(f, r.x, steps, opt.nm);
        iters += r2.iterations;
        if (r2.f <= r.f) r = r2;
        r.converged = r2.converged;
    }
    if (!std::isfinite(r.f)) {
        CalibResult out;
        out.theta = initial;
        out.ivrmse = f0;
        out.ivrmse_initial = f0;
        out.n_quotes_used = qs.size();
        out.iterations = iters;
        out.status = "no_improvement";
        return out;
    }
    return detail::finish(qs, {std::exp(r.x[0]), std::exp(r.x[1]), r.x[2], std::exp(r.x[3])}, f0, iters,
                          r.converged);
}

/// Calibrates sigma alone, kappa, xi and alpha held at `fixed`.
inline CalibResult calibrate_sigma(const QuoteSet& qs, const PertTheta& fixed, const CalibOptions& opt = {}) {
    if (qs.quotes.empty()) throw EmptyQuoteSet("calibrate_sigma: quote set is empty");
    fixed.validate();
    const auto f = [&](const std::vector<double>& z) {
        return detail::calib_objective(qs, {std::log(fixed.kappa), std::log(fixed.xi), fixed.alpha, z[0]});
    };
    const std::vector<double> z0{std::log(fixed.sigma)};
    const double f0 = f(z0);
    NelderMeadOptions nm = opt.nm;
    nm.f_spread_tol = std::min(nm.f_spread_tol, 1e-10);
    NelderMeadResult r = nelder_mead(f, z0, {0.1}, nm);
    int iters = r.iterations;
    if (opt.restart) {
        const NelderMeadResult r2 = nelder_mead(f, r.x, {0.02}, nm);
        iters += r2.iterations;
        if (r2.f <= r.f) r = r2;
        r.converged = r2.converged;
    }
    PertTheta th = fixed;
    if (std::isfinite(r.f)) th.sigma = std::exp(r.x[0]);
    return detail::finish(qs, th, f0, iters, r.converged && std::isfinite(r.f));
}

// ---------------------------------------------------------------------------
// Static cross-section

struct StaticSpec {
    MgParams mg{1.5, 0.08, 1.5, -0.5, 1.0, 0.0};
    std::vector<double> initial_vols{0.35, 0.25, 0.18, 0.10}; ///< V(0) as a volatility; variance = vol^2
    int maturity_days = 30;
    double spot = 100.0;
    std::vector<double> strikes = [] {
        std::vector<double> k;
        for (int i = 0; i <= 20; ++i) k.push_back(90.0 + i);
        return k;
    }();
    McConfig mc{500000, 10, true, true, 100, 20240501, 0};

    void validate() const {
        mg.validate();
        detail::require(!initial_vols.empty(), "StaticSpec: need at least one initial volatility");
        for (double v : initial_vols) detail::require(std::isfinite(v) && v > 0.0, "StaticSpec: volatilities must be > 0");
        detail::require(maturity_days >= 1, "StaticSpec: maturity_days must be >= 1");
        detail::require(std::isfinite(spot) && spot > 0.0, "StaticSpec: spot must be > 0");
        detail::require(!strikes.empty(), "StaticSpec: need at least one strike");
        mc.validate();
    }
};

struct SmileRow {
    double moneyness = 0.0;
    double log_price_diff = 0.0; ///< log(C_MC / C_pert)
    double iv_mc = 0.0;
    double iv_pert = 0.0;
    double c1_ratio = 0.0;       ///< C1 / (C0 + C1)
};

struct StaticRow {
    double v_init = 0.0;
    double sigma_hat = 0.0;
    double ivrmse = 0.0;
    CalibResult calib;
    std::vector<McPrice> mc;
    std::vector<SmileRow> smile;
};

struct StaticReport {
    std::vector<StaticRow> rows;
};

inline StaticReport run_static_experiment(const StaticSpec& spec) {
    spec.validate();
    const double tau = spec.maturity_days / kDaysPerYear;
    const int spd = spec.mc.steps_per_day;
    StaticReport rep;
    for (std::size_t i = 0; i < spec.initial_vols.size(); ++i) {
        const double vol = spec.initial_vols[i];
        SurfaceRequest req;
        req.spot = spec.spot;
        req.variance = vol * vol;
        req.maturity_steps = {spec.maturity_days * spd};
        req.dt = 1.0 / (kDaysPerYear * spd);
        req.strikes = spec.strikes;
        req.stream = i;
        const SurfaceResult sim = simulate_surface(req, spec.mg, spec.mc);

        std::vector<std::pair<OptionSpec, double>> priced;
        for (std::size_t k = 0; k < spec.strikes.size(); ++k)
            priced.push_back({{spec.spot, spec.strikes[k], tau, OptionKind::Call, vol * vol},
                              sim.prices[0][k].estimate});
        const QuoteSet qs = make_quote_set(priced, spec.mg.r);
        const CalibResult cal = calibrate_sigma(qs, {spec.mg.kappa, spec.mg.xi, spec.mg.alpha, vol});

        StaticRow row;
        row.v_init = vol;
        row.sigma_hat = cal.theta.sigma;
        row.ivrmse = cal.ivrmse;
        row.calib = cal;
        row.mc = sim.prices[0];
        const PerturbParams pert{cal.theta.sigma,
                                 spec.mg.xi * std::pow(cal.theta.sigma, 2.0 * (spec.mg.alpha - 1.0)), 1.0};
        const DerivedParams d = derive_params(spec.mg.kappa, spec.mg.r, pert);
        for (std::size_t k = 0; k < spec.strikes.size(); ++k) {
            const OptionSpec opt = priced[k].first;
            const double c0 = black_scholes(opt.kind, opt.spot, opt.strike, tau, spec.mg.r, pert.sigma);
            const double c1 = perturb_correction(opt, pert, d, spec.mg.r);
            const double mc = priced[k].second;
            const auto iv_or_nan = [&](double p) {
                try {
                    return implied_vol(p, opt, spec.mg.r);
                } catch (const Error&) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
            };
            row.smile.push_back({opt.strike / opt.spot, std::log(mc / (c0 + c1)), iv_or_nan(mc),
                                  iv_or_nan(c0 + c1), c1 / (c0 + c1)});
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Simulated time series

/// Merton-Garman parameters of the four simulated data sets.
inline MgParams dataset_params(int id) {
    switch (id) {
        case 1: return {1.1768, 0.0823, 0.3000, -0.5459, 1.0, 0.0};
        case 2: return {1.1768, 0.0823, 0.3000, 0.0, 1.0, 0.0};
        case 3: return {1.1768, 0.0823, 0.3000, 0.5459, 1.0, 0.0};
        case 4: return {1.1768, 0.1250, 0.3000, -0.5459, 1.0, 0.0};
        default: throw ValidationError("dataset id must be 1, 2, 3 or 4");
    }
}

struct ParamSummary {
    std::string param;
    double truth = std::numeric_limits<double>::quiet_NaN(); ///< NaN where the model has no counterpart
    double mean = 0.0;
    double bias = std::numeric_limits<double>::quiet_NaN();
    double std = 0.0;
};

struct TimeSeriesReport {
    int dataset = 1;
    std::vector<PanelRow> panel;
    std::vector<CalibResult> calibrations; ///< one per sample path
    std::vector<ParamSummary> params;      ///< kappa, xi, alpha, sigma2
    double ivrmse_mean = 0.0;
    double ivrmse_std = 0.0;
};

namespace detail {

inline double sample_mean(const std::vector<double>& v) {
    return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = sample_mean(v);
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
    return std::sqrt(pairwise_sum(d) / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Quote set for one sample path: every option at every observation, each
/// carrying the latent variance of its observation date.
inline QuoteSet path_quotes(const std::vector<PanelRow>& panel, int path_id, double r) {
    std::vector<std::pair<OptionSpec, double>> priced;
    for (const PanelRow& row : panel) {
        if (row.path_id != path_id) continue;
        priced.push_back({{row.spot, row.strike, row.maturity_days / kDaysPerYear, OptionKind::Call, row.v_true},
                          row.mc_price});
    }
    return make_quote_set(priced, r);
}

inline TimeSeriesReport run_timeseries_experiment(int dataset, const TimeSeriesSpec& spec, std::uint64_t seed,
                                                  unsigned threads = 0, const CalibOptions& copt = {}) {
    const MgParams mg = dataset_params(dataset);
    spec.validate();
    TimeSeriesReport rep;
    rep.dataset = dataset;
    rep.panel = generate_time_series(spec, mg, seed, threads);

    rep.calibrations.resize(static_cast<std::size_t>(spec.n_sample_paths));
    const PertTheta start{mg.kappa, mg.xi, mg.alpha, std::sqrt(spec.variance0)};
    parallel_for(rep.calibrations.size(), threads, [&](std::size_t p) {
        const QuoteSet qs = path_quotes(rep.panel, static_cast<int>(p), mg.r);
        rep.calibrations[p] = calibrate(qs, start, copt);
    });

    std::vector<double> kap, xi, al, s2, err;
    for (const CalibResult& c : rep.calibrations) {
        kap.push_back(c.theta.kappa);
        xi.push_back(c.theta.xi);
        al.push_back(c.theta.alpha);
        s2.push_back(c.theta.sigma * c.theta.sigma);
        err.push_back(c.ivrmse);
    }
    const auto summary = [](std::string name, double truth, const std::vector<double>& v) {
        ParamSummary s;
        s.param = std::move(name);
        s.truth = truth;
        s.mean = detail::sample_mean(v);
        s.bias = s.mean - truth;
        s.std = detail::sample_std(v);
        return s;
    };
    rep.params = {summary("kappa", mg.kappa, kap), summary("xi", mg.xi, xi), summary("alpha", mg.alpha, al),
                  summary("sigma2", std::numeric_limits<double>::quiet_NaN(), s2)};
    rep.ivrmse_mean = detail::sample_mean(err);
    rep.ivrmse_std = detail::sample_std(err);
    return rep;
}

}  // namespace mgpert
