#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pdlc/config.hpp"

namespace pdlc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

const std::vector<std::string>& subcommand_names();

/// Runs one subcommand, writing CSV to `csv` and diagnostics to `diag`.
/// Returns kExitOk, kExitConfig or kExitNumeric. Column layouts:
///
///   queue-solve     p0..pN,Q,W,Var,Ex,De
///   optimize-m      m,energy,welfare,excess,deficiency,w_extra,var_served,energy_opt,welfare_opt
///   tradeoff-sweep  m,delta,var_served,w_extra
///   wind-welfare    p_r,sigma,p_t_star,F
///   procure-single  p_t,p_r,cost,sweeps
///   procure-double  record,iter,phase,outer,p_t,p_r,cost,rt_solves,converged
///                   (one "result" row, then one "trace" row per iterate)
///   simulate        binary: model,events,departures,tv,empirical_w,w_stderr,analytic_w,
///                           empirical_var,analytic_var,q_mean,q_stderr,arrival_rate,
///                           sojourn,max_grants,p0..pN
///                   full-info: m,delta,intervals,min_grants,max_grants,band_violations,
///                              max_violation,mean_on_time,mean_off_time
///   contract-sweep  cv,k_r,p_r,p_t,converged,error
int run_subcommand(std::string_view name, const RunConfig& cfg, std::ostream& csv,
                   std::ostream& diag);

/// Welfare curve used by the market subcommands: h is dropped unless
/// cfg.include_idle_cost is set.
WelfareCurve market_curve(const RunConfig& cfg);

}  // namespace pdlc
