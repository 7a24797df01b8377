#pragma once

// Euler full-truncation Monte Carlo for the Merton-Garman system.
//
// Sampling units are antithetic pairs (or single paths). Unit u draws its
// normals from Philox at counter (step, u, stream), so a unit's path does not
// depend on which thread simulates it. With stratification on, unit u takes
// stratum u mod n_strata of the first-step z_S uniform, and each run of
// n_strata consecutive units forms one replication group; the standard error
// comes from the spread of group means. Statistics are merged in fixed-size
// chunks in index order, which makes results independent of the worker count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mgpert/analytic.hpp"
#include "mgpert/errors.hpp"
#include "mgpert/model.hpp"
#include "mgpert/normal.hpp"
#include "mgpert/parallel.hpp"
#include "mgpert/philox.hpp"

namespace mgpert {

struct McConfig {
    std::uint64_t n_paths = 500000;
    int steps_per_day = 10;
    bool antithetic = true;
    bool stratified = true;
    std::uint64_t n_strata = 100;
    std::uint64_t seed = 20240501;
    unsigned threads = 0; ///< 0 = all cores; never affects results

    [[nodiscard]] std::uint64_t n_units() const noexcept { return antithetic ? n_paths / 2 : n_paths; }

    void validate() const {
        detail::require(n_paths >= 2, "McConfig: n_paths must be >= 2");
        detail::require(!antithetic || n_paths % 2 == 0, "McConfig: n_paths must be even when antithetic");
        detail::require(steps_per_day >= 1, "McConfig: steps_per_day must be >= 1");
        detail::require(n_paths <= (std::uint64_t{1} << 32), "McConfig: n_paths must be <= 2^32");
        if (stratified) {
            detail::require(n_strata >= 1, "McConfig: n_strata must be >= 1");
            detail::require(n_units() % n_strata == 0,
                            "McConfig: n_strata must divide the number of sampling units (pairs when antithetic)");
            detail::require(n_units() / n_strata >= 2, "McConfig: stratification needs >= 2 replications");
        }
    }
};

struct McPrice {
    double estimate = 0.0;  ///< currency
    double std_error = 0.0; ///< currency
    std::uint64_t n_effective = 0;
};

struct EulerState {
    double s;
    double v;
};

/// One full-truncation Euler step with correlated normals (z_s, z_v).
inline EulerState step_euler(double s, double v, double dt, double z_s, double z_v, const MgParams& mg) noexcept {
    const double vp = std::max(v, 0.0);
    const double sq = std::sqrt(dt);
    const double vol = mg.alpha == 1.0 ? vp : std::pow(vp, mg.alpha);
    return {s + mg.r * s * dt + s * std::sqrt(vp) * sq * z_s,
            v + mg.kappa * (mg.theta - vp) * dt + mg.xi * vol * sq * z_v};
}

/// (z_S, z_V) with corr rho from two uniforms: z_S = N^-1(u_s),
/// z_V = rho z_S + sqrt(1 - rho^2) N^-1(u_w).
inline std::array<double, 2> correlated_normals(double u_s, double u_w, double rho) noexcept {
    const double zs = normal_quantile(u_s);
    return {zs, rho * zs + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * normal_quantile(u_w)};
}

/// Contracts priced off one set of paths: every strike at every maturity.
struct SurfaceRequest {
    double spot = 100.0;
    double variance = 0.04;
    std::vector<int> maturity_steps;  ///< ascending step indices
    double dt = 1.0 / (kDaysPerYear * 10.0);
    std::vector<double> strikes;
    OptionKind kind = OptionKind::Call;
    std::uint64_t stream = 0;         ///< distinguishes independent simulations under one seed
    bool record_terminal_spot = false; ///< also estimate E[S_T] at each maturity (martingale check)
};

/// result[m][k] for maturity m, strike k; `forward[m]` is E[S_T] when requested.
struct SurfaceResult {
    std::vector<std::vector<McPrice>> prices;
    std::vector<McPrice> forward;
};

namespace detail {

inline constexpr std::uint64_t kChunk = 256;

/// Running mean/M2 (Chan et al. merge) for a vector of statistics.
struct Moments {
    std::uint64_t n = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    explicit Moments(std::size_t k = 0) : mean(k, 0.0), m2(k, 0.0) {}

    void add(const std::vector<double>& x) {
        ++n;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - mean[i];
            mean[i] += d / static_cast<double>(n);
            m2[i] += d * (x[i] - mean[i]);
        }
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n), nt = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = o.mean[i] - mean[i];
            mean[i] += d * nb / nt;
            m2[i] += o.m2[i] + d * d * na * nb / nt;
        }
        n += o.n;
    }
};

inline Moments merge_tree(std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    Moments a = merge_tree(parts, lo, mid);
    a.merge(merge_tree(parts, mid, hi));
    return a;
}

}  // namespace detail

/// Simulates the surface described by `req`. Prices are discounted payoff means.
inline SurfaceResult simulate_surface(const SurfaceRequest& req, const MgParams& mg, const McConfig& cfg) {
    cfg.validate();
    mg.validate_for_simulation();
    detail::require(std::isfinite(req.spot) && req.spot > 0.0, "simulate_surface: spot must be > 0");
    detail::require(std::isfinite(req.variance), "simulate_surface: variance must be finite");
    detail::require(!req.maturity_steps.empty() && req.maturity_steps.front() >= 1,
                    "simulate_surface: need at least one maturity of >= 1 step");
    detail::require(std::is_sorted(req.maturity_steps.begin(), req.maturity_steps.end()),
                    "simulate_surface: maturities must be ascending");
    detail::require(req.dt > 0.0, "simulate_surface: dt must be > 0");
    detail::require(!req.strikes.empty(), "simulate_surface: need at least one strike");
    for (double k : req.strikes) detail::require(std::isfinite(k) && k > 0.0, "simulate_surface: strikes must be > 0");

    const std::size_t nm = req.maturity_steps.size(), nk = req.strikes.size();
    const std::size_t n_opt = nm * nk + (req.record_terminal_spot ? nm : 0);
    const int n_steps = req.maturity_steps.back();
    const std::uint64_t units = cfg.n_units();
    const std::uint64_t group = cfg.stratified ? cfg.n_strata : 1;
    const std::uint64_t n_samples = units / group;
    const std::uint64_t n_chunks = (n_samples + detail::kChunk - 1) / detail::kChunk;
    const PhiloxStream rng(cfg.seed, req.stream);
    std::vector<double> disc(nm);
    for (std::size_t m = 0; m < nm; ++m) disc[m] = std::exp(-mg.r * req.dt * req.maturity_steps[m]);

    std::vector<detail::Moments> chunks(n_chunks);
    parallel_for(n_chunks, cfg.threads, [&](std::size_t c) {
        detail::Moments mom(n_opt);
        std::vector<double> unit_val(n_opt), group_val(n_opt), s_at(2 * nm);
        const std::uint64_t first = c * detail::kChunk;
        const std::uint64_t last = std::min(n_samples, first + detail::kChunk);
        for (std::uint64_t g = first; g < last; ++g) {
            std::fill(group_val.begin(), group_val.end(), 0.0);
            for (std::uint64_t j = 0; j < group; ++j) {
                const std::uint64_t u = g * group + j;
                const auto unit = static_cast<std::uint32_t>(u);
                std::fill(unit_val.begin(), unit_val.end(), 0.0);
                const int n_signs = cfg.antithetic ? 2 : 1;
                double s[2] = {req.spot, req.spot}, v[2] = {req.variance, req.variance};
                std::size_t m = 0;
                for (int step = 0; step < n_steps; ++step) {
                    const auto uu = rng.uniforms(static_cast<std::uint32_t>(step), unit);
                    double u0 = uu[0];
                    if (step == 0 && cfg.stratified)
                        u0 = (static_cast<double>(u % cfg.n_strata) + u0) / static_cast<double>(cfg.n_strata);
                    const auto [zs, zv] = correlated_normals(u0, uu[1], mg.rho);
                    for (int sgn = 0; sgn < n_signs; ++sgn) {
                        const double flip = sgn == 0 ? 1.0 : -1.0;
                        const EulerState next = step_euler(s[sgn], v[sgn], req.dt, flip * zs, flip * zv, mg);
                        s[sgn] = next.s;
                        v[sgn] = next.v;
                    }
                    while (m < nm && req.maturity_steps[m] == step + 1) {
                        s_at[2 * m] = s[0];
                        s_at[2 * m + 1] = s[1];
                        ++m;
                    }
                }
                for (int sgn = 0; sgn < n_signs; ++sgn) {
                    for (std::size_t mi = 0; mi < nm; ++mi) {
                        const double st = s_at[2 * mi + sgn];
                        for (std::size_t k = 0; k < nk; ++k)
                            unit_val[mi * nk + k] += disc[mi] * payoff(req.kind, st, req.strikes[k]);
                        if (req.record_terminal_spot) unit_val[nm * nk + mi] += st;
                    }
                }
                for (std::size_t i = 0; i < n_opt; ++i) group_val[i] += unit_val[i] / n_signs;
            }
            for (auto& x : group_val) x /= static_cast<double>(group);
            mom.add(group_val);
        }
        chunks[c] = std::move(mom);
    });

    const detail::Moments total = detail::merge_tree(chunks, 0, chunks.size());
    const double ns = static_cast<double>(total.n);
    const auto to_price = [&](std::size_t i) {
        const double var = total.n > 1 ? total.m2[i] / (ns - 1.0) : 0.0;
        return McPrice{total.mean[i], std::sqrt(std::max(var, 0.0) / ns), cfg.n_paths};
    };
    SurfaceResult out;
    out.prices.assign(nm, std::vector<McPrice>(nk));
    for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t k = 0; k < nk; ++k) out.prices[m][k] = to_price(m * nk + k);
    if (req.record_terminal_spot)
        for (std::size_t m = 0; m < nm; ++m) out.forward.push_back(to_price(nm * nk + m));
    return out;
}

/// Number of Euler steps for tau_cal at steps_per_day (at least one).
inline int steps_for(double tau_cal, int steps_per_day) {
    return std::max(1, static_cast<int>(std::lround(tau_cal * kDaysPerYear * steps_per_day)));
}

/// Single-contract price; dt = tau_cal / steps so the maturity is hit exactly.
inline McPrice price_option_mc(const OptionSpec& opt, const MgParams& mg, const McConfig& cfg,
                               std::uint64_t stream = 0) {
    opt.validate();
    detail::require(opt.tau_cal > 0.0, "price_option_mc: tau_cal must be > 0");
    const int n = steps_for(opt.tau_cal, cfg.steps_per_day);
    SurfaceRequest req;
    req.spot = opt.spot;
    req.variance = opt.variance;
    req.maturity_steps = {n};
    req.dt = opt.tau_cal / n;
    req.strikes = {opt.strike};
    req.kind = opt.kind;
    req.stream = stream;
    return simulate_surface(req, mg, cfg).prices[0][0];
}

struct TimeSeriesSpec {
    int n_sample_paths = 10;
    int n_obs = 12;
    int obs_spacing_days = 7;
    double spot0 = 100.0;
    double variance0 = 0.08;
    std::vector<int> maturities_days{7, 14, 30, 60, 90, 180};
    std::vector<double> moneyness{0.9, 0.9 + 0.2 / 9, 0.9 + 0.4 / 9, 0.9 + 0.6 / 9, 0.9 + 0.8 / 9,
                                  0.9 + 1.0 / 9, 0.9 + 1.2 / 9, 0.9 + 1.4 / 9, 0.9 + 1.6 / 9, 1.1};
    McConfig option_mc{10000, 20, true, true, 50, 20240501, 0};

    /// Full scale: 100 paths, 52 weekly observations, 50,000 simulations per option.
    [[nodiscard]] static TimeSeriesSpec full_scale() {
        TimeSeriesSpec s;
        s.n_sample_paths = 100;
        s.n_obs = 52;
        s.option_mc.n_paths = 50000;
        return s;
    }

    void validate() const {
        detail::require(n_sample_paths >= 1, "TimeSeriesSpec: n_sample_paths must be >= 1");
        detail::require(n_obs >= 1, "TimeSeriesSpec: n_obs must be >= 1");
        detail::require(obs_spacing_days >= 1, "TimeSeriesSpec: obs_spacing_days must be >= 1");
        detail::require(std::isfinite(spot0) && spot0 > 0.0, "TimeSeriesSpec: spot0 must be > 0");
        detail::require(std::isfinite(variance0) && variance0 > 0.0, "TimeSeriesSpec: variance0 must be > 0");
        detail::require(!maturities_days.empty(), "TimeSeriesSpec: need at least one maturity");
        detail::require(std::is_sorted(maturities_days.begin(), maturities_days.end()) &&
                            std::adjacent_find(maturities_days.begin(), maturities_days.end()) ==
                                maturities_days.end(),
                        "TimeSeriesSpec: maturities must be strictly ascending");
        detail::require(maturities_days.front() >= 1, "TimeSeriesSpec: maturities must be >= 1 day");
        detail::require(!moneyness.empty(), "TimeSeriesSpec: need at least one strike");
        for (double m : moneyness)
            detail::require(std::isfinite(m) && m > 0.0, "TimeSeriesSpec: moneyness must be > 0");
        option_mc.validate();
    }
};

/// One row of the simulated panel.
struct PanelRow {
    int path_id = 0;
    int obs_index = 0;
    double obs_time_years = 0.0;
    double v_true = 0.0;
    int maturity_days = 0;
    double strike = 0.0;
    double moneyness = 0.0;
    double spot = 0.0;
    double mc_price = 0.0;
    double mc_std_error = 0.0;
};

/// Stream ids: latent paths live in the upper half of the stream space, option
/// simulations are numbered path * n_obs + obs.
inline constexpr std::uint64_t kLatentStreamBase = std::uint64_t{1} << 63;

/// Latent (S, V) at each observation date for one sample path, simulated with
/// the option-MC step size. V is reported as V^+ (the value the dynamics use).
inline std::vector<EulerState> latent_path(const TimeSeriesSpec& spec, const MgParams& mg, std::uint64_t seed,
                                           int path_id) {
    const PhiloxStream rng(seed, kLatentStreamBase + static_cast<std::uint64_t>(path_id));
    const int spd = spec.option_mc.steps_per_day;
    const double dt = 1.0 / (kDaysPerYear * spd);
    std::vector<EulerState> out;
    double s = spec.spot0, v = spec.variance0;
    std::uint32_t step = 0;
    for (int obs = 0; obs < spec.n_obs; ++obs) {
        out.push_back({s, std::max(v, 0.0)});
        for (int k = 0; k < spec.obs_spacing_days * spd; ++k, ++step) {
            const auto u = rng.uniforms(step, 0);
            const auto [zs, zv] = correlated_normals(u[0], u[1], mg.rho);
            const EulerState next = step_euler(s, v, dt, zs, zv, mg);
            s = next.s;
            v = next.v;
        }
    }
    return out;
}

/// Panel of MC prices: for every sample path and observation, the full
/// maturity x strike grid priced from the latent state.
inline std::vector<PanelRow> generate_time_series(const TimeSeriesSpec& spec, const MgParams& mg,
                                                  std::uint64_t seed, unsigned threads = 0) {
    spec.validate();
    mg.validate_for_simulation();
    const std::size_t nm = spec.maturities_days.size(), nk = spec.moneyness.size();
    const int spd = spec.option_mc.steps_per_day;
    std::vector<int> steps;
    for (int d : spec.maturities_days) steps.push_back(d * spd);

    std::vector<PanelRow> rows;
    rows.reserve(static_cast<std::size_t>(spec.n_sample_paths) * spec.n_obs * nm * nk);
    McConfig cfg = spec.option_mc;
    cfg.seed = seed;
    cfg.threads = threads;
    for (int p = 0; p < spec.n_sample_paths; ++p) {
        const auto path = latent_path(spec, mg, seed, p);
        for (int o = 0; o < spec.n_obs; ++o) {
            SurfaceRequest req;
            req.spot = path[o].s;
            req.variance = path[o].v;
            req.maturity_steps = steps;
            req.dt = 1.0 / (kDaysPerYear * spd);
            for (double m : spec.moneyness) req.strikes.push_back(m * path[o].s);
            req.stream = static_cast<std::uint64_t>(p) * spec.n_obs + o;
            const SurfaceResult res = simulate_surface(req, mg, cfg);
            for (std::size_t m = 0; m < nm; ++m)
                for (std::size_t k = 0; k < nk; ++k)
                    rows.push_back({p, o, o * spec.obs_spacing_days / kDaysPerYear, path[o].v,
                                    spec.maturities_days[m], req.strikes[k], spec.moneyness[k], path[o].s,
                                    res.prices[m][k].estimate, res.prices[m][k].std_error});
        }
    }
    return rows;
}

}  // namespace mgpert
