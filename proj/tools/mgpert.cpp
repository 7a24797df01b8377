// mgpert command-line tool: closed-form and Monte Carlo pricing, the heat-kernel
// oracle check, and the static / time-series experiments.
//
// Exit codes: 0 ok, 1 check failure, 2 validation, 3 degenerate parameters,
// 4 non-convergence.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgpert/mgpert.hpp"

namespace fs = std::filesystem;
using namespace mgpert;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kValidation = 2, kDegenerate = 3, kNoConvergence = 4 };

/// Resolved configuration; its hash goes into every output file. Worker
/// counts and output locations are deliberately excluded.
class Resolved {
public:
    void put(const std::string& k, double v) { kv_[k] = fmt_num(v); }
    void put(const std::string& k, const std::string& v) { kv_[k] = v; }
    [[nodiscard]] std::string hash() const {
        std::string s;
        for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
        return hex16(fnv1a(s));
    }

private:
    std::map<std::string, std::string> kv_;
};

std::string json_num(double v) { return std::isfinite(v) ? fmt_num(v) : "null"; }

void print_json(std::ostream& os, const std::vector<std::pair<std::string, double>>& fields) {
    os << '{';
    for (std::size_t i = 0; i < fields.size(); ++i)
        os << (i ? ", " : "") << '"' << fields[i].first << "\": " << json_num(fields[i].second);
    os << "}\n";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Appends `--key=value` for every config-file entry whose flag was not given
/// on the command line, so flags take precedence over the file. Unknown keys
/// surface as CLI parse errors.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw ValidationError("config line " + std::to_string(lineno) + ": invalid key '" + key + "'");
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory: " + dir);
    const fs::path probe = fs::path(dir) / ".mgpert_write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw ValidationError("output directory is not writable: " + dir);
    }
    fs::remove(probe, ec);
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write " + p.string());
    return f;
}

// ---------------------------------------------------------------------------

struct PricingArgs {
    double spot = 100.0;
    double strike = 100.0;
    double days = 30.0;
    double rate = 0.0;
    double sigma = 0.173;
    double variance = 0.0324;
    double kappa = 1.5;
    double theta = 0.08;
    double xi = 1.5;
    double rho = -0.5;
    double alpha = 1.0;
    double v0 = 1.0;
    double xi0 = 0.0; ///< 0 = linkage xi sigma^(2(alpha-1))
    std::string kind = "call";

    void add_to(CLI::App* sub, bool with_contract = true) {
        if (with_contract) {
            sub->add_option("--spot", spot, "Underlying price S [currency]")->capture_default_str();
            sub->add_option("--strike", strike, "Strike K [currency]")->capture_default_str();
            sub->add_option("--kind", kind, "Option kind: call or put")->capture_default_str();
        }
        sub->add_option("--days", days, "Time to maturity [calendar days, 365-day year]")->capture_default_str();
        sub->add_option("--rate", rate, "Risk-free rate r [1/year]")->capture_default_str();
        sub->add_option("--sigma", sigma, "Averaged volatility sigma [1/sqrt(year)]")->capture_default_str();
        sub->add_option("--variance", variance, "Current instantaneous variance V [1/year]")->capture_default_str();
        sub->add_option("--kappa", kappa, "Mean-reversion speed kappa [1/year]")->capture_default_str();
        sub->add_option("--theta", theta, "Long-run variance theta [1/year]")->capture_default_str();
        sub->add_option("--xi", xi, "Vol-of-vol xi [year^(alpha-3/2)]")->capture_default_str();
        sub->add_option("--rho", rho, "Correlation rho [-1, 1]")->capture_default_str();
        sub->add_option("--alpha", alpha, "Variance exponent alpha [dimensionless]")->capture_default_str();
        sub->add_option("--v0", v0, "Reference variance scale V0 [1/year]")->capture_default_str();
        sub->add_option("--xi0", xi0, "Symmetric vol-of-vol xi0 [1/sqrt(year)]; 0 = xi sigma^(2(alpha-1))")
            ->capture_default_str();
    }

    [[nodiscard]] OptionKind option_kind() const {
        if (kind == "call") return OptionKind::Call;
        if (kind == "put") return OptionKind::Put;
        throw ValidationError("--kind must be 'call' or 'put'");
    }
    [[nodiscard]] MgParams mg() const { return {kappa, theta, xi, rho, alpha, rate}; }
    [[nodiscard]] PerturbParams pert() const {
        PerturbParams p = PerturbParams::from_mg(mg(), sigma, v0);
        if (xi0 != 0.0) p.xi0 = xi0;
        return p;
    }
    [[nodiscard]] OptionSpec option(double k) const {
        detail::require(std::isfinite(days) && days >= 0.0, "--days must be >= 0");
        return {spot, k, days / kDaysPerYear, option_kind(), variance};
    }
    void record(Resolved& r) const {
        r.put("spot", spot);
        r.put("strike", strike);
        r.put("days", days);
        r.put("rate", rate);
        r.put("sigma", sigma);
        r.put("variance", variance);
        r.put("kappa", kappa);
        r.put("theta", theta);
        r.put("xi", xi);
        r.put("rho", rho);
        r.put("alpha", alpha);
        r.put("v0", v0);
        r.put("xi0", xi0);
        r.put("kind", kind);
    }
};

struct McArgs {
    std::uint64_t paths = 100000;
    int steps_per_day = 10;
    bool antithetic = true;
    bool stratified = true;
    std::uint64_t strata = 100;

    void add_to(CLI::App* sub) {
        sub->add_option("--paths", paths, "Number of simulated paths")->capture_default_str();
        sub->add_option("--steps-per-day", steps_per_day, "Euler steps per calendar day")->capture_default_str();
        sub->add_option("--antithetic", antithetic, "Antithetic pairs (true/false)")->capture_default_str();
        sub->add_option("--stratified", stratified, "Stratify the first-step spot shock (true/false)")
            ->capture_default_str();
        sub->add_option("--strata", strata, "Number of strata; must divide the number of sampling units")
            ->capture_default_str();
    }
    [[nodiscard]] McConfig config(std::uint64_t seed, unsigned threads) const {
        return {paths, steps_per_day, antithetic, stratified, strata, seed, threads};
    }
    void record(Resolved& r) const {
        r.put("paths", std::to_string(paths));
        r.put("steps-per-day", std::to_string(steps_per_day));
        r.put("antithetic", antithetic ? "true" : "false");
        r.put("stratified", stratified ? "true" : "false");
        r.put("strata", std::to_string(strata));
    }
};

// ---------------------------------------------------------------------------

int cmd_price(const PricingArgs& a) {
    const OptionSpec opt = a.option(a.strike);
    const MgParams mg = a.mg();
    const PerturbParams pert = a.pert();
    const PriceBreakdown pb = price_mg(opt, mg, pert);
    double iv = std::numeric_limits<double>::quiet_NaN();
    if (opt.tau_cal > 0.0) {
        try {
            iv = implied_vol(pb.total, opt, mg.r);
        } catch (const OutOfBounds&) {
        } catch (const NoConvergence&) {
        }
    }
    print_json(std::cout, {{"c0", pb.c0}, {"c1", pb.c1}, {"total", pb.total}, {"d1", pb.d1}, {"d2", pb.d2},
                           {"implied_vol", iv}});
    return kOk;
}

int cmd_mc_price(const PricingArgs& a, const McArgs& m, std::uint64_t seed, unsigned threads) {
    const OptionSpec opt = a.option(a.strike);
    detail::require(opt.tau_cal > 0.0, "--days must be > 0 for Monte Carlo pricing");
    const McPrice p = price_option_mc(opt, a.mg(), m.config(seed, threads));
    print_json(std::cout, {{"estimate", p.estimate}, {"std_error", p.std_error}});
    return kOk;
}

struct OracleArgs {
    std::vector<double> strikes{95.0, 100.0, 105.0};
    int nodes = 128;
    int time_slices = 64;
    double half_width = 8.0;
    double fd_step = 1e-4;
    int refinements = 1;
    double rel_tol = 1e-4;
    double c1_tol = 1e-3;
    int draws = 10000;
    std::string out;

    void add_to(CLI::App* sub) {
        sub->add_option("--strikes", strikes, "Strikes to check [currency]")->capture_default_str();
        sub->add_option("--nodes", nodes, "Quadrature nodes per spatial axis")->capture_default_str();
        sub->add_option("--time-slices", time_slices, "Gauss-Legendre nodes in t")->capture_default_str();
        sub->add_option("--half-width", half_width, "Spatial half-width [kernel std devs]")->capture_default_str();
        sub->add_option("--fd-step", fd_step, "Finite-difference step for psi0 derivatives [dimensionless]")
            ->capture_default_str();
        sub->add_option("--refinements", refinements, "Refinement levels (each doubles every node count)")
            ->capture_default_str();
        sub->add_option("--rel-tol", rel_tol, "Refinement tolerance relative to the integral of |integrand|")
            ->capture_default_str();
        sub->add_option("--c1-tol", c1_tol, "Allowed relative C1 mismatch (floor 5e-3 currency)")
            ->capture_default_str();
        sub->add_option("--draws", draws, "Random points for the annihilation report")->capture_default_str();
        sub->add_option("--out", out, "Directory for oracle.csv (default: CSV on stdout)");
    }
};

int cmd_oracle_check(const PricingArgs& a, const OracleArgs& o, std::uint64_t seed, unsigned threads,
                     const std::string& hash) {
    const MgParams mg = a.mg();
    mg.validate();
    const PerturbParams pert = a.pert();
    const DerivedParams d = derive_params(mg, pert);
    QuadratureConfig q;
    q.half_width_sigmas = o.half_width;
    q.nodes_x = q.nodes_y = o.nodes;
    q.time_slices = o.time_slices;
    q.fd_step = o.fd_step;
    q.refinements = o.refinements;
    q.rel_tol = o.rel_tol;
    q.threads = threads;
    q.validate();
    detail::require(!o.strikes.empty(), "--strikes must not be empty");
    detail::require(o.draws >= 0, "--draws must be >= 0");
    std::optional<fs::path> dir;
    if (!o.out.empty()) dir = prepare_out_dir(o.out);

    bool ok = true;
    std::vector<OracleRow> rows;
    std::vector<std::string> report;
    double worst_rel = 0.0, worst_psi0 = 0.0;
    for (double k : o.strikes) {
        const OptionSpec opt = a.option(k);
        detail::require(opt.tau_cal > 0.0, "--days must be > 0 for the oracle check");
        const HeatCoords hc = to_heat_coords(opt, pert);
        const Psi0Eval p0 = psi0(hc, d);
        const Psi1Quadrature p1 = psi1_quadrature(hc, mg, pert, d, q);
        const double scale = opt.strike * tilt(hc, d);
        const double c1 = perturb_correction(opt, pert, d, mg.r);
        const double c1_quad = scale * p1.value;
        const double err = std::fabs(c1_quad - c1);
        rows.push_back({hc.x, hc.y, hc.tau, p0.value, p1.value, c1, err});
        const double allowed = std::max(o.c1_tol * std::fabs(c1), 5e-3);
        ok = ok && err <= allowed;
        worst_rel = std::max(worst_rel, err / std::max(std::fabs(c1), 1e-300));
        const double c0 = black_scholes(OptionKind::Call, opt.spot, opt.strike, opt.tau_cal, mg.r, pert.sigma);
        const double id = std::fabs(scale * p0.value - c0) / std::max(c0, 1e-300);
        worst_psi0 = std::max(worst_psi0, id);
    }
    const bool psi0_ok = worst_psi0 <= 1e-9;
    ok = ok && psi0_ok;

    // Annihilation: each of the c2, c3, c4 terms against |c1 term| on random points.
    const PhiloxStream rng(seed, 0x0A11);
    double worst[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < o.draws; ++i) {
        const auto u = rng.uniforms(0, static_cast<std::uint32_t>(i));
        const auto w = rng.uniforms(1, static_cast<std::uint32_t>(i));
        const double tau_max = 0.5 * pert.sigma * pert.sigma * std::max(a.days, 1.0) / kDaysPerYear;
        const HeatCoords hc{-0.3 + 0.6 * u[0], std::log(a.variance / pert.v0) - 1.0 + 2.0 * u[1],
                            tau_max * (0.05 + 0.95 * w[0])};
        const BreakingTerms t = breaking_terms(hc, mg, pert, d, q.fd_step);
        const double ref = std::fabs(t.c1) + 1e-300;
        worst[0] = std::max(worst[0], std::fabs(t.c2) / ref);
        worst[1] = std::max(worst[1], std::fabs(t.c3) / ref);
        worst[2] = std::max(worst[2], std::fabs(t.c4) / ref);
    }
    const bool ann_ok = worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-6;
    ok = ok && ann_ok;

    char buf[256];
    std::snprintf(buf, sizeof buf, "annihilation draws=%d max|c2/c1|=%.3e max|c3/c1|=%.3e max|c4/c1|=%.3e %s",
                  o.draws, worst[0], worst[1], worst[2], ann_ok ? "ok" : "FAIL");
    report.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "psi0 identity max rel err=%.3e %s", worst_psi0, psi0_ok ? "ok" : "FAIL");
    report.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "summary points=%zu max_rel_err_c1=%.3e status=%s", rows.size(), worst_rel,
                  ok ? "pass" : "fail");
    report.emplace_back(buf);

    if (dir) {
        auto f = open_out(*dir / "oracle.csv");
        write_oracle_csv(f, rows, hash);
        for (const auto& line : report) std::cout << line << '\n';
    } else {
        write_oracle_csv(std::cout, rows, hash);
        for (const auto& line : report) std::cout << "# " << line << '\n';
    }
    return ok ? kOk : kCheckFailed;
}

struct StaticArgs {
    std::uint64_t paths = 500000;
    int steps_per_day = 10;
    std::uint64_t strata = 100;
    int maturity_days = 30;
    std::string out = "results";
};

int cmd_static(const StaticArgs& s, std::uint64_t seed, unsigned threads, const std::string& hash) {
    StaticSpec spec;
    spec.maturity_days = s.maturity_days;
    spec.mc.n_paths = s.paths;
    spec.mc.steps_per_day = s.steps_per_day;
    spec.mc.n_strata = s.strata;
    spec.mc.seed = seed;
    spec.mc.threads = threads;
    spec.validate();
    const fs::path dir = prepare_out_dir(s.out);
    const StaticReport rep = run_static_experiment(spec);
    {
        auto f = open_out(dir / "static_summary.csv");
        write_static_summary_csv(f, rep, hash);
    }
    std::printf("%-8s %-10s %-10s\n", "v_init", "sigma_hat", "ivrmse");
    for (const StaticRow& r : rep.rows) {
        char name[64];
        std::snprintf(name, sizeof name, "smile_v%.2f.csv", r.v_init);
        auto f = open_out(dir / name);
        write_smile_csv(f, r.smile, hash);
        std::printf("%-8.4f %-10.4f %-10.4f\n", r.v_init, r.sigma_hat, r.ivrmse);
    }
    return kOk;
}

struct TimeSeriesArgs {
    std::vector<int> datasets{1};
    bool full = false;
    bool desk = false;
    int sample_paths = 0;
    int obs = 0;
    std::uint64_t sims = 0;
    int steps_per_day = 20;
    std::uint64_t strata = 50;
    std::string out = "results";
};

int cmd_timeseries(const TimeSeriesArgs& t, std::uint64_t seed, unsigned threads, const std::string& hash) {
    detail::require(!(t.full && t.desk), "--full and --desk-scale are mutually exclusive");
    TimeSeriesSpec spec = t.full ? TimeSeriesSpec::full_scale() : TimeSeriesSpec{};
    if (t.sample_paths) spec.n_sample_paths = t.sample_paths;
    if (t.obs) spec.n_obs = t.obs;
    if (t.sims) spec.option_mc.n_paths = t.sims;
    spec.option_mc.steps_per_day = t.steps_per_day;
    spec.option_mc.n_strata = t.strata;
    spec.validate();
    for (int ds : t.datasets) (void)dataset_params(ds);
    const fs::path dir = prepare_out_dir(t.out);

    std::vector<TimeSeriesReport> reps;
    for (int ds : t.datasets) {
        reps.push_back(run_timeseries_experiment(ds, spec, seed + static_cast<std::uint64_t>(ds), threads));
        auto f = open_out(dir / ("panel_ds" + std::to_string(ds) + ".csv"));
        write_panel_csv(f, reps.back().panel, hash);
    }
    {
        auto f = open_out(dir / "param_summary.csv");
        write_param_summary_csv(f, reps, hash);
    }
    {
        auto f = open_out(dir / "fit_summary.csv");
        write_fit_summary_csv(f, reps, hash);
    }
    std::printf("%-8s %-8s %-10s %-10s %-10s %-10s\n", "dataset", "param", "true", "mean", "bias", "std");
    for (const auto& rep : reps)
        for (const auto& p : rep.params)
            std::printf("%-8d %-8s %-10.4f %-10.4f %-10.4f %-10.4f\n", rep.dataset, p.param.c_str(), p.truth,
                        p.mean, p.bias, p.std);
    std::printf("%-8s %-12s %-12s\n", "dataset", "ivrmse_mean", "ivrmse_std");
    for (const auto& rep : reps) std::printf("%-8d %-12.5f %-12.5f\n", rep.dataset, rep.ivrmse_mean, rep.ivrmse_std);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leading-order perturbative pricing for the Merton-Garman model"};
    app.require_subcommand(1);
    unsigned threads = 0;
    std::uint64_t seed = 20240501;
    std::string config;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); never changes results")
        ->capture_default_str();
    app.add_option("--seed", seed, "Random seed (64-bit)")->capture_default_str();
    app.add_option("--config", config, "Flat key=value file; keys are long flag names, flags take precedence");

    PricingArgs pa;
    McArgs ma;
    OracleArgs oa;
    StaticArgs sa;
    TimeSeriesArgs ta;

    auto* price = app.add_subcommand("price", "Closed-form C0 + C1 price as JSON");
    pa.add_to(price);
    auto* mc = app.add_subcommand("mc-price", "Monte Carlo price with standard error as JSON");
    pa.add_to(mc);
    ma.add_to(mc);
    auto* oracle = app.add_subcommand("oracle-check", "Heat-kernel quadrature checks of psi0, psi1 and C1");
    pa.add_to(oracle, false);
    oracle->add_option("--spot", pa.spot, "Underlying price S [currency]")->capture_default_str();
    oa.add_to(oracle);
    auto* exp = app.add_subcommand("experiment", "Static cross-section or simulated time-series experiment");
    exp->require_subcommand(1);
    auto* st = exp->add_subcommand("static", "30-day cross-section: calibration summary and smile CSVs");
    st->add_option("--paths", sa.paths, "Monte Carlo paths per scenario")->capture_default_str();
    st->add_option("--steps-per-day", sa.steps_per_day, "Euler steps per calendar day")->capture_default_str();
    st->add_option("--strata", sa.strata, "Number of strata")->capture_default_str();
    st->add_option("--maturity-days", sa.maturity_days, "Maturity [calendar days]")->capture_default_str();
    st->add_option("--out", sa.out, "Output directory (created if missing)")->capture_default_str();
    auto* ts = exp->add_subcommand("timeseries", "Weekly simulated panel with per-date calibration and summary CSVs");
    ts->add_option("--dataset", ta.datasets, "Data set ids in 1..4")->capture_default_str();
    ts->add_flag("--full", ta.full, "Full scale: 100 paths, 52 observations, 50,000 simulations per option");
    ts->add_flag("--desk-scale", ta.desk, "Desk scale (default): 10 paths, 12 observations, 10,000 simulations");
    ts->add_option("--sample-paths", ta.sample_paths, "Override the number of sample paths");
    ts->add_option("--obs", ta.obs, "Override the number of weekly observations");
    ts->add_option("--sims", ta.sims, "Override simulations per option");
    ts->add_option("--steps-per-day", ta.steps_per_day, "Euler steps per calendar day")->capture_default_str();
    ts->add_option("--strata", ta.strata, "Number of strata")->capture_default_str();
    ts->add_option("--out", ta.out, "Output directory (created if missing)")->capture_default_str();
    for (CLI::App* sub : {price, mc, oracle, exp, st, ts}) sub->fallthrough();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }

    Resolved res;
    res.put("seed", std::to_string(seed));
    try {
        if (price->parsed()) {
            res.put("command", "price");
            pa.record(res);
            return cmd_price(pa);
        }
        if (mc->parsed()) {
            return cmd_mc_price(pa, ma, seed, threads);
        }
        if (oracle->parsed()) {
            res.put("command", "oracle-check");
            pa.record(res);
            std::ostringstream ks;
            for (double k : oa.strikes) ks << fmt_num(k) << ';';
            res.put("strikes", ks.str());
            res.put("nodes", oa.nodes);
            res.put("time-slices", oa.time_slices);
            res.put("half-width", oa.half_width);
            res.put("fd-step", oa.fd_step);
            res.put("refinements", oa.refinements);
            res.put("rel-tol", oa.rel_tol);
            res.put("c1-tol", oa.c1_tol);
            res.put("draws", oa.draws);
            return cmd_oracle_check(pa, oa, seed, threads, res.hash());
        }
        if (st->parsed()) {
            res.put("command", "experiment static");
            res.put("paths", std::to_string(sa.paths));
            res.put("steps-per-day", sa.steps_per_day);
            res.put("strata", std::to_string(sa.strata));
            res.put("maturity-days", sa.maturity_days);
            return cmd_static(sa, seed, threads, res.hash());
        }
        if (ts->parsed()) {
            res.put("command", "experiment timeseries");
            std::ostringstream ds;
            for (int d : ta.datasets) ds << d << ';';
            res.put("dataset", ds.str());
            res.put("full", ta.full ? "true" : "false");
            res.put("sample-paths", ta.sample_paths);
            res.put("obs", ta.obs);
            res.put("sims", std::to_string(ta.sims));
            res.put("steps-per-day", ta.steps_per_day);
            res.put("strata", std::to_string(ta.strata));
            return cmd_timeseries(ta, seed, threads, res.hash());
        }
    } catch (const DegenerateParams& e) {
        std::cerr << "degenerate parameters: " << e.what() << '\n';
        return kDegenerate;
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    return kValidation;
}
