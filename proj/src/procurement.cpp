#include "pdlc/procurement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

std::vector<BalancingAtom> MarketSpec::default_balancing(double k_t) {
    return {{1.5 * k_t, 0.5}, {2.5 * k_t, 0.5}};
}

void MarketSpec::validate() const {
    require(std::isfinite(k_t) && k_t > 0.0, "market: k_t must be positive");
    require(std::isfinite(k_r) && k_r >= 0.0, "market: k_r must be >= 0");
    require(k_r < k_t, "market: k_r < k_t is required");
    require(gamma >= 0.0 && gamma < 1.0, "market: gamma must lie in [0, 1)");
    require(!balancing.empty(), "market: balancing price distribution is empty");
    double total = 0.0;
    for (const auto& atom : balancing) {
        require(std::isfinite(atom.price) && atom.price > k_t,
                "market: every balancing price must exceed k_t");
        require(atom.prob >= 0.0, "market: balancing probabilities must be >= 0");
        total += atom.prob;
    }
    require(std::abs(total - 1.0) < 1e-9, "market: balancing probabilities must sum to 1");
}

double MarketSpec::mean_balancing_price() const {
    double mean = 0.0;
    for (const auto& atom : balancing) mean += atom.prob * atom.price;
    return mean;
}

namespace {

// The convex continuation of W_c: the [1, 2] line extended without the cap.
struct Extension {
    const WelfareCurve& curve;

    double slope(double y) const { return y < 1.0 ? curve.extrapolation_slope() : curve.right_slope(y); }
    double next(double y) const { return y < 1.0 ? 1.0 : curve.next_breakpoint(y); }
};

double dispatch_cost(double p_t, double p_v, double k_b, double sell, double x1, double x2,
                     const WelfareCurve& curve) {
    return k_b * x2 - sell * (p_t - x1) + curve(x1 + x2 + p_v);
}

}  // namespace

RealTimeSolution real_time_dispatch(double p_t, double p_v, double k_b, const MarketSpec& spec,
                                    const WelfareCurve& curve) {
    require(p_t >= 0.0 && std::isfinite(p_t), "real_time_dispatch: p_t must be >= 0");
    require(std::isfinite(p_v), "real_time_dispatch: p_v must be finite");
    const double sell = spec.gamma * spec.k_t;
    const Extension ext{curve};

    const double top = p_v + p_t;
    double y = p_v;
    while (y < top && -ext.slope(y) > sell) y = std::min(ext.next(y), top);
    // Decided by position rather than by x1 == p_t, which rounding can break.
    const bool exhausted = y >= top;

    RealTimeSolution sol;
    if (exhausted) {
        y = top;
        while (-ext.slope(y) > k_b) y = ext.next(y);
        sol.x1 = p_t;
        sol.x2 = y - top;
    } else {
        sol.x1 = y - p_v;
    }
    sol.cost = dispatch_cost(p_t, p_v, k_b, sell, sol.x1, sol.x2, curve);

    // Left of the cap the true curve is flat, so buying nothing can beat the scan.
    if (p_v < curve.cap_point()) {
        const double idle = dispatch_cost(p_t, p_v, k_b, sell, 0.0, 0.0, curve);
        if (idle <= sol.cost) {
            sol.x1 = 0.0;
            sol.x2 = 0.0;
            sol.cost = idle;
        }
    }
    const bool all_used = sol.x1 == p_t;

    if (sol.x2 > 0.0) {
        sol.regime = DispatchCase::Balancing;
    } else if (sol.x1 > 0.0) {
        sol.regime = DispatchCase::Reserved;
    }
    if (all_used) {
        const double d = -curve.right_slope(top);
        sol.dual = std::max(0.0, std::min(k_b, d) - sell);
    }
    return sol;
}

namespace {

// R(p_t, . , k_b) bends only where p_v or p_v + p_t meets a kink of W_c.
std::vector<double> recourse_knots(double p_t, const WelfareCurve& curve) {
    auto knots = curve.knots();
    const std::size_t n = knots.size();
    for (std::size_t i = 0; i < n; ++i) knots.push_back(knots[i] - p_t);
    return knots;
}

template <class F>
double over_balancing(const MarketSpec& spec, F&& per_price) {
    double total = 0.0;
    for (const auto& atom : spec.balancing) total += atom.prob * per_price(atom.price);
    return total;
}

double score_gradient(double p_t, double p_r, double cv, double k_b, const MarketSpec& spec,
                      const WelfareCurve& curve, const Quadrature& quad, long& solves) {
    // f(p_r (1 + cv z), p_r, cv) = (z^2 + z / cv - 1) / p_r
    const std::array<double, 3> score{-1.0 / p_r, 1.0 / (cv * p_r), 1.0 / p_r};
    return quad.expect_pwl(
        [&](double p_v) {
            ++solves;
            return real_time_dispatch(p_t, p_v, k_b, spec, curve).cost;
        },
        recourse_knots(p_t, curve), p_r, cv * p_r, score);
}

}  // namespace

double expected_recourse(double p_t, const WindSpec& wind, const MarketSpec& spec,
                         const WelfareCurve& curve, const Quadrature& quad) {
    const auto knots = recourse_knots(p_t, curve);
    return over_balancing(spec, [&](double k_b) {
        return quad.expect_pwl(
            [&](double p_v) { return real_time_dispatch(p_t, p_v, k_b, spec, curve).cost; }, knots,
            wind.p_r, wind.stddev());
    });
}

double day_ahead_pt_condition(double p_t, const MarketSpec& spec, const WindSpec& wind,
                              const WelfareCurve& curve, const Quadrature& quad) {
    const auto knots = recourse_knots(p_t, curve);
    const double dual = over_balancing(spec, [&](double k_b) {
        return quad.expect_pwl(
            [&](double p_v) { return real_time_dispatch(p_t, p_v, k_b, spec, curve).dual; }, knots,
            wind.p_r, wind.stddev());
    });
    return (1.0 - spec.gamma) * spec.k_t - dual;
}

double double_market_objective(double p_t, double p_r, double cv, const MarketSpec& spec,
                               const WelfareCurve& curve, const Quadrature& quad) {
    const auto wind = WindSpec::proportional(p_r, cv);
    return spec.k_t * p_t + spec.k_r * p_r + expected_recourse(p_t, wind, spec, curve, quad);
}

double pr_score_gradient(double p_t, double p_r, double cv, double k_b, const MarketSpec& spec,
                         const WelfareCurve& curve, const Quadrature& quad) {
    require(p_r > 0.0 && cv > 0.0, "pr_score_gradient: p_r and cv must be positive");
    long solves = 0;
    return score_gradient(p_t, p_r, cv, k_b, spec, curve, quad, solves);
}

double single_market_objective(double p_t, double p_r, double cv, const MarketSpec& spec,
                               const WelfareCurve& curve, const Quadrature& quad) {
    return spec.k_t * p_t + spec.k_r * p_r + expected_welfare(p_r, p_t, cv * p_r, curve, quad);
}

void SAConfig::validate() const {
    require(max_iter >= 1, "sa: max_iter must be >= 1");
    require(block_pt >= 0 && block_pr >= 0, "sa: block lengths must be >= 0");
    require(std::isfinite(step_scale) && step_scale > 0.0, "sa: step_scale must be positive");
    require(std::isfinite(step_scale_pr) && step_scale_pr >= 0.0, "sa: step_scale_pr must be >= 0");
    require(std::isfinite(epsilon) && epsilon > 0.0, "sa: epsilon must be positive");
    require(inner_nodes >= 8, "sa: inner_nodes must be >= 8");
    require(max_outer >= 1, "sa: max_outer must be >= 1");
    require(window >= 1, "sa: window must be >= 1");
    require(std::isfinite(p_t0) && p_t0 >= 0.0, "sa: p_t0 must be >= 0");
    require(std::isfinite(p_r0), "sa: p_r0 must be finite");
}

namespace {

constexpr double kPrFloor = 0.1;

class Procurer {
public:
    Procurer(const MarketSpec& spec, const WindSpec& wind, const WelfareCurve& curve,
             const SAConfig& cfg)
        : spec_(spec),
          curve_(curve),
          cfg_(cfg),
          cv_(wind.cv),
          quad_(cfg.inner_nodes, cfg.scheme),
          rng_(cfg.seed),
          kb_dist_(make_kb_dist(spec)) {
        spec.validate();
        wind.validate();
        cfg.validate();
        require(wind.correlated, "procurement: the double market needs the correlated wind model");
        require(cv_ > 0.0, "procurement: cv must be positive");
        p_max_ = curve.n() * (1.0 + 6.0 * cv_);
        res_.p_t_star = std::clamp(cfg.p_t0, 0.0, p_max_);
        const double start = cfg.p_r0 >= 0.0 ? cfg.p_r0 : (wind.p_r > 0.0 ? wind.p_r : 0.5 * curve.n());
        res_.p_r_star = std::clamp(start, kPrFloor, p_max_);
    }

    // One joint update per sample; stops early when `stop` says so.
    template <class Stop>
    long joint_updates(long budget, Stop&& stop) {
        long i = 0;
        while (i < budget) {
            ++i;
            const double k_b = draw_kb();
            const double p_v = draw_wind(res_.p_r_star);
            const auto sol = real_time_dispatch(res_.p_t_star, p_v, k_b, spec_, curve_);
            ++res_.rt_solve_count;
            const double g_t = (1.0 - spec_.gamma) * spec_.k_t - sol.dual;
            const double g_r = spec_.k_r + sol.cost * score_function(p_v, res_.p_r_star, cv_);
            res_.p_t_star = project_t(res_.p_t_star - step(count_t_) * g_t);
            res_.p_r_star = project_r(res_.p_r_star - step_r(count_r_) * g_r);
            ++iter_;
            record(0, 0);
            if (stop()) break;
        }
        return i;
    }

    // Long P_t blocks are thinned in the trace to about max_iter points.
    void pt_block(int outer) {
        count_t_ = 0;
        const int n = cfg_.pt_block();
        const int stride = std::max(1, (n + cfg_.max_iter - 1) / cfg_.max_iter);
        for (int i = 0; i < n; ++i) {
            const double k_b = draw_kb();
            const double p_v = draw_wind(res_.p_r_star);
            const auto sol = real_time_dispatch(res_.p_t_star, p_v, k_b, spec_, curve_);
            ++res_.rt_solve_count;
            const double g = (1.0 - spec_.gamma) * spec_.k_t - sol.dual;
            res_.p_t_star = project_t(res_.p_t_star - step(count_t_) * g);
            ++iter_;
            if ((i + 1) % stride == 0 || i + 1 == n) record(1, outer);
        }
    }

    void pr_block(int outer) {
        count_r_ = 0;
        for (int i = 0; i < cfg_.pr_block(); ++i) {
            const double k_b = draw_kb();
            const double g = spec_.k_r + score_gradient(res_.p_t_star, res_.p_r_star, cv_, k_b,
                                                        spec_, curve_, quad_, res_.rt_solve_count);
            res_.p_r_star = project_r(res_.p_r_star - step_r(count_r_) * g);
            ++iter_;
            record(2, outer);
        }
    }

    // Alternating blocks until both move less than epsilon.
    void alternate(bool pr_first) {
        for (int outer = 1; outer <= cfg_.max_outer; ++outer) {
            const double t0 = res_.p_t_star;
            const double r0 = res_.p_r_star;
            if (pr_first) {
                pr_block(outer);
                pt_block(outer);
            } else {
                pt_block(outer);
                pr_block(outer);
            }
            res_.outer_iterations = outer;
            if (std::abs(res_.p_t_star - t0) < cfg_.epsilon &&
                std::abs(res_.p_r_star - r0) < cfg_.epsilon) {
                res_.converged = true;
                return;
            }
        }
        std::ostringstream msg;
        msg << "no convergence after " << cfg_.max_outer << " outer iterations";
        res_.note = msg.str();
    }

    ProcurementResult finish() {
        res_.cost = double_market_objective(res_.p_t_star, res_.p_r_star, cv_, spec_, curve_, quad_);
        return std::move(res_);
    }

    ProcurementResult& result() { return res_; }
    bool pinned_t() const { return res_.p_t_star <= 0.0 || res_.p_t_star >= p_max_; }

private:
    static std::discrete_distribution<int> make_kb_dist(const MarketSpec& spec) {
        std::vector<double> probs;
        for (const auto& atom : spec.balancing) probs.push_back(atom.prob);
        return {probs.begin(), probs.end()};
    }

    double draw_kb() { return spec_.balancing[static_cast<std::size_t>(kb_dist_(rng_))].price; }
    double draw_wind(double p_r) { return p_r * (1.0 + cv_ * normal_(rng_)); }
    // alpha(i) = step_scale / i; i restarts with every block.
    double step(long& count) const { return cfg_.step_scale / static_cast<double>(++count); }
    double step_r(long& count) const { return cfg_.pr_scale() / static_cast<double>(++count); }
    double project_t(double v) const { return std::clamp(v, 0.0, p_max_); }
    double project_r(double v) const { return std::clamp(v, kPrFloor, p_max_); }

    void record(int phase, int outer) {
        res_.trace.push_back({iter_, phase, outer, res_.p_t_star, res_.p_r_star});
    }

    const MarketSpec& spec_;
    const WelfareCurve& curve_;
    SAConfig cfg_;
    double cv_;
    Quadrature quad_;
    std::mt19937_64 rng_;
    std::discrete_distribution<int> kb_dist_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double p_max_ = 0.0;
    long iter_ = 0;
    long count_t_ = 0;
    long count_r_ = 0;
    ProcurementResult res_;
};

}  // namespace

ProcurementResult sa_algorithm1(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg) {
    Procurer run(spec, wind, curve, cfg);
    run.alternate(false);
    return run.finish();
}

ProcurementResult sa_algorithm2(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg) {
    Procurer run(spec, wind, curve, cfg);
    run.joint_updates(cfg.max_iter, [] { return false; });
    auto& res = run.result();
    res.converged = false;
    res.note = "near optimal: fixed budget of joint updates";
    return run.finish();
}

ProcurementResult sa_algorithm3(const MarketSpec& spec, const WindSpec& wind,
                                const WelfareCurve& curve, const SAConfig& cfg) {
    Procurer run(spec, wind, curve, cfg);
    std::deque<double> recent;
    const auto window = static_cast<std::size_t>(cfg.window);
    const long warm = run.joint_updates(cfg.max_iter, [&] {
        // An iterate held at a bound by the projection has not settled.
        if (run.pinned_t()) {
            recent.clear();
            return false;
        }
        recent.push_back(run.result().p_t_star);
        if (recent.size() > window + 1) recent.pop_front();
        if (recent.size() <= window) return false;
        const auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
        return *hi - *lo < cfg.epsilon;
    });
    run.result().warmup_iterations = warm;
    run.alternate(true);
    return run.finish();
}

JointSolution single_market_joint(const MarketSpec& spec, double cv, const WelfareCurve& curve,
                                  const Quadrature& quad) {
    spec.validate();
    require(std::isfinite(cv) && cv >= 0.0, "single_market_joint: cv must be >= 0");
    constexpr double kTol = 1e-4;
    constexpr double kStop = 1e-3;
    constexpr int kMaxSweeps = 1000;
    const double hi = curve.n() * (1.0 + 6.0 * cv);
    const auto objective = [&](double p_t, double p_r) {
        return single_market_objective(p_t, p_r, cv, spec, curve, quad);
    };

    JointSolution s;
    for (s.sweeps = 1; s.sweeps <= kMaxSweeps; ++s.sweeps) {
        const double t0 = s.p_t;
        const double r0 = s.p_r;
        s.p_r = golden_section_min([&](double r) { return objective(s.p_t, r); }, 0.0, hi, kTol).x;
        s.p_t = golden_section_min([&](double t) { return objective(t, s.p_r); }, 0.0, hi, kTol).x;
        if (std::abs(s.p_t - t0) + std::abs(s.p_r - r0) < kStop) break;
    }
    s.sweeps = std::min(s.sweeps, kMaxSweeps);
    s.cost = objective(s.p_t, s.p_r);
    return s;
}

std::vector<ContractCell> contract_sweep(const MarketSpec& spec, std::span<const double> cv_grid,
                                         std::span<const double> k_r_grid,
                                         const WelfareCurve& curve, const SAConfig& cfg) {
    require(!cv_grid.empty() && !k_r_grid.empty(), "contract_sweep: grids must be non-empty");
    std::vector<ContractCell> cells;
    cells.reserve(cv_grid.size() * k_r_grid.size());
    for (double cv : cv_grid) {
        for (double k_r : k_r_grid) {
            ContractCell cell;
            cell.cv = cv;
            cell.k_r = k_r;
            try {
                MarketSpec market = spec;
                market.k_r = k_r;
                const double p_r0 = cfg.p_r0 >= 0.0 ? cfg.p_r0 : 0.5 * curve.n();
                const auto res = sa_algorithm3(market, WindSpec::proportional(p_r0, cv), curve, cfg);
                cell.p_r = res.p_r_star;
                cell.p_t = res.p_t_star;
                cell.ok = res.converged;
                if (!res.converged) cell.error = res.note;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace pdlc
