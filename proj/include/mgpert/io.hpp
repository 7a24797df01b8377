#pragma once

// CSV writers for the report formats. Every file starts with a
// "# config_hash=<16 hex digits>" comment line, then a header row.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mgpert/calibration.hpp"
#include "mgpert/heat_kernel.hpp"
#include "mgpert/monte_carlo.hpp"

namespace mgpert {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// 17 significant digits; empty field for non-finite values.
inline std::string fmt_num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void csv_line(std::ostream& os, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) os << ',';
        os << f;
        first = false;
    }
    os << '\n';
}

inline void csv_preamble(std::ostream& os, std::string_view config_hash, std::string_view header) {
    os << "# config_hash=" << config_hash << '\n' << header << '\n';
}

}  // namespace detail

inline void write_panel_csv(std::ostream& os, const std::vector<PanelRow>& rows, std::string_view hash) {
    detail::csv_preamble(os, hash,
                         "path_id,obs_index,obs_time_years,v_true,maturity_days,strike,moneyness,mc_price,mc_std_error");
    for (const PanelRow& r : rows)
        detail::csv_line(os, {std::to_string(r.path_id), std::to_string(r.obs_index), fmt_num(r.obs_time_years),
                              fmt_num(r.v_true), std::to_string(r.maturity_days), fmt_num(r.strike),
                              fmt_num(r.moneyness), fmt_num(r.mc_price), fmt_num(r.mc_std_error)});
}

inline void write_static_summary_csv(std::ostream& os, const StaticReport& rep, std::string_view hash) {
    detail::csv_preamble(os, hash, "v_init,sigma_hat,ivrmse");
    for (const StaticRow& r : rep.rows)
        detail::csv_line(os, {fmt_num(r.v_init), fmt_num(r.sigma_hat), fmt_num(r.ivrmse)});
}

inline void write_smile_csv(std::ostream& os, const std::vector<SmileRow>& rows, std::string_view hash) {
    detail::csv_preamble(os, hash, "moneyness,log_price_diff,iv_mc,iv_pert,c1_ratio");
    for (const SmileRow& r : rows)
        detail::csv_line(os, {fmt_num(r.moneyness), fmt_num(r.log_price_diff), fmt_num(r.iv_mc),
                              fmt_num(r.iv_pert), fmt_num(r.c1_ratio)});
}

inline void write_param_summary_csv(std::ostream& os, const std::vector<TimeSeriesReport>& reps, std::string_view hash) {
    detail::csv_preamble(os, hash, "dataset,param,true,mean,bias,std");
    for (const TimeSeriesReport& rep : reps)
        for (const ParamSummary& p : rep.params)
            detail::csv_line(os, {std::to_string(rep.dataset), p.param, fmt_num(p.truth), fmt_num(p.mean),
                                  fmt_num(p.bias), fmt_num(p.std)});
}

inline void write_fit_summary_csv(std::ostream& os, const std::vector<TimeSeriesReport>& reps, std::string_view hash) {
    detail::csv_preamble(os, hash, "dataset,ivrmse_mean,ivrmse_std");
    for (const TimeSeriesReport& rep : reps)
        detail::csv_line(os, {std::to_string(rep.dataset), fmt_num(rep.ivrmse_mean), fmt_num(rep.ivrmse_std)});
}

inline void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows, std::string_view hash) {
    detail::csv_preamble(os, hash, "x,y,tau,psi0,psi1_quad,c1_closed_form,abs_err");
    for (const OracleRow& r : rows)
        detail::csv_line(os, {fmt_num(r.x), fmt_num(r.y), fmt_num(r.tau), fmt_num(r.psi0), fmt_num(r.psi1_quad),
                              fmt_num(r.c1_closed_form), fmt_num(r.abs_err)});
}

}  // namespace mgpert
