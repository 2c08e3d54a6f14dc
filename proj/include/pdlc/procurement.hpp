#pragma once

// Energy procurement for the building operator:
//  - real-time dispatch once wind P_v and the balancing price k_b are known,
//  - day-ahead reservation of traditional packets P_t and wind packets P_r,
//    by quadrature (single market) or stochastic approximation (double market).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdlc/metrics.hpp"
#include "pdlc/quadrature.hpp"
#include "pdlc/wind.hpp"

namespace pdlc {

struct BalancingAtom {
    double price = 0.0;
    double prob = 0.0;
    bool operator==(const BalancingAtom&) const = default;
};

struct MarketSpec {
    double k_t = 1.0;     ///< day-ahead price per packet
    double k_r = 0.05;    ///< wind reservation price per packet
    double gamma = 0.5;   ///< sell-back discount, credit gamma * k_t per returned packet
    std::vector<BalancingAtom> balancing;  ///< distribution of the balancing price k_b

    /// {1.5 k_t: 0.5, 2.5 k_t: 0.5}
    static std::vector<BalancingAtom> default_balancing(double k_t);
    void validate() const;
    double mean_balancing_price() const;
    bool operator==(const MarketSpec&) const = default;
};

enum class DispatchCase : std::uint8_t {
    Idle,       ///< neither reserved nor balancing packets used
    Reserved,   ///< part or all of the reservation, no balancing
    Balancing,  ///< whole reservation plus balancing packets
};

struct RealTimeSolution {
    double x1 = 0.0;    ///< reserved packets used
    double x2 = 0.0;    ///< balancing packets bought
    double cost = 0.0;  ///< R(p_t, p_v, k_b)
    double dual = 0.0;  ///< multiplier of x1 <= p_t, equal to -dR/dp_t - gamma k_t
    DispatchCase regime = DispatchCase::Idle;
};

/// Minimises k_b x2 - gamma k_t (p_t - x1) + W_c(x1 + x2 + p_v) over
/// 0 <= x1 <= p_t, x2 >= 0 by walking the breakpoints of W_c.
RealTimeSolution real_time_dispatch(double p_t, double p_v, double k_b, const MarketSpec& spec,
                                    const WelfareCurve& curve);

/// E over (P_v, k_b) of the real-time cost, P_v ~ N(wind.p_r, wind.stddev()^2).
double expected_recourse(double p_t, const WindSpec& wind, const MarketSpec& spec,
                         const WelfareCurve& curve, const Quadrature& quad);

/// (1 - gamma) k_t - E[dual]: derivative of the day-ahead objective in p_t.
double day_ahead_pt_condition(double p_t, const MarketSpec& spec, const WindSpec& wind,
                              const WelfareCurve& curve, const Quadrature& quad);

/// k_t p_t + k_r p_r + E[R] with correlated wind sigma = cv p_r.
double double_market_objective(double p_t, double p_r, double cv, const MarketSpec& spec,
                               const WelfareCurve& curve, const Quadrature& quad);

/// d/dp_r E[R | k_b] as E[R f] (score function f), integrated over P_v.
double pr_score_gradient(double p_t, double p_r, double cv, double k_b, const MarketSpec& spec,
                         const WelfareCurve& curve, const Quadrature& quad);

/// k_t p_t + k_r p_r + E[W_c(p_t + P_v)], P_v ~ N(p_r, (cv p_r)^2).
double single_market_objective(double p_t, double p_r, double cv, const MarketSpec& spec,
                               const WelfareCurve& curve, const Quadrature& quad);

struct SAConfig {
    int max_iter = 2000;      ///< M: iterations of Algorithm 2 and cap of Algorithm 3's first phase
    int block_pt = 0;         ///< steps of a P_t block; 0 means max_iter
    int block_pr = 0;         ///< steps of a P_r block; 0 means max_iter
    double step_scale = 5.0;  ///< alpha(i) = step_scale / i
    double step_scale_pr = 0.0;  ///< separate scale for P_r; 0 means step_scale
    double epsilon = 0.05;    ///< outer convergence threshold (packets)
    int inner_nodes = 64;     ///< Gauss-Hermite nodes of the P_r block
    Quadrature::Scheme scheme = Quadrature::Scheme::Exact;
    int max_outer = 50;
    int window = 50;          ///< stabilisation window of the first phase of Algorithm 3
    double p_t0 = 0.0;        ///< initial P_t
    double p_r0 = -1.0;       ///< initial P_r; negative means the wind forecast, or N / 2
    std::uint64_t seed = 1;

    void validate() const;
    double pr_scale() const { return step_scale_pr > 0.0 ? step_scale_pr : step_scale; }
    int pt_block() const { return block_pt > 0 ? block_pt : max_iter; }
    int pr_block() const { return block_pr > 0 ? block_pr : max_iter; }
    bool operator==(const SAConfig&) const = default;
};

struct TracePoint {
    long iter = 0;  ///< update count since the start, thinned points included
    int phase = 0;  ///< 0 joint update, 1 P_t block, 2 P_r block
    int outer = 0;
    double p_t = 0.0;
    double p_r = 0.0;
};

struct ProcurementResult {
    double p_t_star = 0.0;
    double p_r_star = 0.0;
    double cost = 0.0;  ///< deterministic objective at the returned point
    std::vector<TracePoint> trace;  ///< P_t blocks longer than max_iter are thinned
    long rt_solve_count = 0;
    bool converged = false;
    int outer_iterations = 0;
    long warmup_iterations = 0;  ///< Algorithm 3: joint-update iterations before switching
    std::string note;
};

/// Alternating blocks: P_t by sampled duals, P_r by the score gradient
/// integrated over P_v. Stops when both blocks move less than epsilon.
ProcurementResult sa_algorithm1(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg);

/// Joint single-sample updates of P_t and P_r for M iterations.
ProcurementResult sa_algorithm2(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg);

/// Algorithm 2 until P_t stabilises, then Algorithm 1 blocks from there.
ProcurementResult sa_algorithm3(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg);

struct JointSolution {
    double p_t = 0.0;
    double p_r = 0.0;
    double cost = 0.0;
    int sweeps = 0;
};

/// Day-ahead-only purchase of traditional and correlated wind packets.
JointSolution single_market_joint(const MarketSpec& spec, double cv, const WelfareCurve& curve,
                                  const Quadrature& quad);

struct ContractCell {
    double cv = 0.0;
    double k_r = 0.0;
    double p_r = 0.0;
    double p_t = 0.0;
    bool ok = false;
    std::string error;
};

/// Double-market contracts (Algorithm 3) over a (cv, k_r) grid; cv outer.
/// Every cell uses the same seed. Failures are recorded, not thrown.
std::vector<ContractCell> contract_sweep(const MarketSpec& spec, std::span<const double> cv_grid,
                                         std::span<const double> k_r_grid,
                                         const WelfareCurve& curve, const SAConfig& cfg);

}  // namespace pdlc
