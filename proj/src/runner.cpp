#include "pdlc/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pdlc/errors.hpp"
#include "pdlc/metrics.hpp"
#include "pdlc/procurement.hpp"
#include "pdlc/queue.hpp"
#include "pdlc/sim.hpp"
#include "pdlc/thermal.hpp"
#include "pdlc/wind.hpp"

namespace pdlc {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(std::ostream& out) : out_(out) {}

    Csv& operator<<(double v) { return cell(num(v)); }
    Csv& operator<<(int v) { return cell(std::to_string(v)); }
    Csv& operator<<(long v) { return cell(std::to_string(v)); }
    Csv& operator<<(const std::string& v) { return cell(v); }
    Csv& operator<<(const char* v) { return cell(v); }
    void end() {
        out_ << '\n';
        first_ = true;
    }

private:
    Csv& cell(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    std::ostream& out_;
    bool first_ = true;
};

void need(const RunConfig& cfg, std::string_view cmd, std::initializer_list<const char*> sections) {
    for (const char* s : sections) {
        if (!cfg.has(s)) {
            throw ConfigError(std::string(cmd) + " requires a [" + s + "] section");
        }
    }
}

Quadrature make_quad(const RunConfig& cfg) { return Quadrature(cfg.quad_nodes, cfg.quad_scheme); }

void queue_solve(const RunConfig& cfg, Csv& csv) {
    need(cfg, "queue-solve", {"queue"});
    const QueueSolution s = steady_state(cfg.queue);
    for (std::size_t x = 0; x < s.p.size(); ++x) csv << "p" + std::to_string(x);
    csv << "Q" << "W" << "Var" << "Ex" << "De";
    csv.end();
    for (double p : s.p) csv << p;
    csv << s.q_mean << s.w_extra << s.var_served << s.excess << s.deficiency;
    csv.end();
}

void optimize_m(const RunConfig& cfg, Csv& csv) {
    need(cfg, "optimize-m", {"queue", "welfare"});
    const int m_energy = optimize_m_energy(cfg.queue, cfg.energy);
    const int m_welfare = optimize_m_welfare(cfg.queue, cfg.welfare);
    csv << "m" << "energy" << "welfare" << "excess" << "deficiency" << "w_extra" << "var_served"
        << "energy_opt" << "welfare_opt";
    csv.end();
    for (int m = 1; m <= cfg.queue.n_appliances; ++m) {
        const QueueSolution s = steady_state(cfg.queue.with_servers(m));
        csv << m << energy_metric(cfg.queue, m, cfg.energy) << welfare_metric(cfg.queue, m, cfg.welfare)
            << s.excess << s.deficiency << s.w_extra << s.var_served << (m == m_energy ? 1 : 0)
            << (m == m_welfare ? 1 : 0);
        csv.end();
    }
}

void tradeoff(const RunConfig& cfg, Csv& csv) {
    need(cfg, "tradeoff-sweep", {"queue"});
    std::vector<int> ms = cfg.m_grid;
    if (ms.empty()) {
        for (int m = 1; m <= cfg.queue.n_appliances; ++m) ms.push_back(m);
    }
    std::vector<double> ds = cfg.delta_grid;
    if (ds.empty()) ds.push_back(cfg.queue.delta);
    csv << "m" << "delta" << "var_served" << "w_extra";
    csv.end();
    for (const TradeoffRow& r : tradeoff_sweep(cfg.queue, ms, ds)) {
        csv << r.m << r.delta << r.var_served << r.w_extra;
        csv.end();
    }
}

void wind_welfare(const RunConfig& cfg, Csv& csv) {
    need(cfg, "wind-welfare", {"queue", "welfare", "wind"});
    const WelfareCurve curve = WelfareCurve::build(cfg.queue, cfg.welfare);
    const Quadrature quad = make_quad(cfg);
    std::vector<double> prs = cfg.p_r_grid;
    if (prs.empty()) prs.push_back(cfg.wind.p_r);
    std::vector<double> sigmas = cfg.sigma_grid;
    if (sigmas.empty()) sigmas.push_back(cfg.wind.stddev());
    csv << "p_r" << "sigma" << "p_t_star" << "F";
    csv.end();
    for (double pr : prs) {
        for (double sd : sigmas) {
            const double pt = optimal_pt_given_wind(pr, sd, curve, quad);
            csv << pr << sd << pt << expected_welfare(pr, pt, sd, curve, quad);
            csv.end();
        }
    }
}

double market_cv(const RunConfig& cfg, std::string_view cmd) {
    if (!cfg.wind.correlated) {
        throw ConfigError(std::string(cmd) + " requires the correlated wind model (correlated = true)");
    }
    return cfg.wind.cv;
}

void procure_single(const RunConfig& cfg, Csv& csv) {
    need(cfg, "procure-single", {"queue", "welfare", "wind", "market"});
    const double cv = market_cv(cfg, "procure-single");
    const JointSolution s = single_market_joint(cfg.market, cv, market_curve(cfg), make_quad(cfg));
    csv << "p_t" << "p_r" << "cost" << "sweeps";
    csv.end();
    csv << s.p_t << s.p_r << s.cost << s.sweeps;
    csv.end();
}

int procure_double(const RunConfig& cfg, Csv& csv, std::ostream& diag) {
    need(cfg, "procure-double", {"queue", "welfare", "wind", "market"});
    market_cv(cfg, "procure-double");
    SAConfig sa = cfg.sa;
    sa.seed = cfg.seed;
    const WelfareCurve curve = market_curve(cfg);
    ProcurementResult r;
    switch (cfg.algorithm) {
        case 1: r = sa_algorithm1(cfg.market, cfg.wind, curve, sa); break;
        case 2: r = sa_algorithm2(cfg.market, cfg.wind, curve, sa); break;
        default: r = sa_algorithm3(cfg.market, cfg.wind, curve, sa); break;
    }
    csv << "record" << "iter" << "phase" << "outer" << "p_t" << "p_r" << "cost" << "rt_solves"
        << "converged";
    csv.end();
    csv << "result" << static_cast<long>(r.trace.size()) << "" << r.outer_iterations << r.p_t_star
        << r.p_r_star << r.cost << r.rt_solve_count << (r.converged ? 1 : 0);
    csv.end();
    for (const TracePoint& t : r.trace) {
        csv << "trace" << t.iter << t.phase << t.outer << t.p_t << t.p_r << "" << "" << "";
        csv.end();
    }
    if (!r.note.empty()) diag << "procure-double: " << r.note << '\n';
    // Algorithm 2 stops on its budget by design; the others must converge.
    if (cfg.algorithm != 2 && !r.converged) return kExitNumeric;
    return kExitOk;
}

void simulate(const RunConfig& cfg, Csv& csv) {
    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;
    if (cfg.protocol == SimProtocol::Binary) {
        need(cfg, "simulate", {"queue"});
        const SimReport r = simulate_binary(cfg.queue, sim);
        const QueueSolution a = steady_state(cfg.queue);
        csv << "model" << "events" << "departures" << "tv" << "empirical_w" << "w_stderr"
            << "analytic_w" << "empirical_var" << "analytic_var" << "q_mean" << "q_stderr"
            << "arrival_rate" << "sojourn" << "max_grants";
        for (std::size_t x = 0; x < r.empirical_p.size(); ++x) csv << "p" + std::to_string(x);
        csv.end();
        const int max_grants = r.grants.empty() ? 0 : *std::max_element(r.grants.begin(), r.grants.end());
        csv << (sim.model == BinaryModel::Slotted ? "slotted" : "chain") << r.events << r.departures
            << total_variation(r.empirical_p, a.p) << r.empirical_w << r.w_stderr << a.w_extra
            << r.empirical_var << a.var_served << r.q_mean << r.q_stderr << r.arrival_rate
            << r.sojourn << max_grants;
        for (double p : r.empirical_p) csv << p;
        csv.end();
        return;
    }
    need(cfg, "simulate", {"thermal"});
    const auto prefs = cfg.fleet.prefs();
    const auto initial = cfg.fleet.initial_states();
    const int m = cfg.full_info_m > 0 ? cfg.full_info_m : min_packets(prefs, cfg.thermal);
    const double delta = cfg.full_info_delta > 0.0
                             ? cfg.full_info_delta
                             : find_feasible_delta(prefs, cfg.thermal, m, sim.horizon, initial).delta;
    const SimReport r = simulate_full_info(initial, prefs, cfg.thermal, m, delta, sim);
    const auto [lo, hi] = std::minmax_element(r.grants.begin(), r.grants.end());
    csv << "m" << "delta" << "intervals" << "min_grants" << "max_grants" << "band_violations"
        << "max_violation" << "mean_on_time" << "mean_off_time";
    csv.end();
    csv << m << delta << static_cast<long>(r.grants.size()) << (r.grants.empty() ? 0 : *lo)
        << (r.grants.empty() ? 0 : *hi) << r.band_violations << r.max_violation << r.mean_on_time
        << r.mean_off_time;
    csv.end();
}

void contract(const RunConfig& cfg, Csv& csv) {
    need(cfg, "contract-sweep", {"queue", "welfare", "market"});
    SAConfig sa = cfg.sa;
    sa.seed = cfg.seed;
    std::vector<double> k_r;
    for (double f : cfg.k_r_grid) k_r.push_back(f * cfg.market.k_t);
    const auto cells = contract_sweep(cfg.market, cfg.cv_grid, k_r, market_curve(cfg), sa);
    csv << "cv" << "k_r" << "p_r" << "p_t" << "converged" << "error";
    csv.end();
    for (const ContractCell& c : cells) {
        csv << c.cv << c.k_r << c.p_r << c.p_t << (c.ok ? 1 : 0) << c.error;
        csv.end();
    }
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"queue-solve",    "optimize-m",     "tradeoff-sweep",
                                                "wind-welfare",   "procure-single", "procure-double",
                                                "simulate",       "contract-sweep"};
    return names;
}

WelfareCurve market_curve(const RunConfig& cfg) {
    WelfareConfig w = cfg.welfare;
    if (!cfg.include_idle_cost) w.h_price = 0.0;
    return WelfareCurve::build(cfg.queue, w);
}

int run_subcommand(std::string_view name, const RunConfig& cfg, std::ostream& out,
                   std::ostream& diag) {
    Csv csv(out);
    try {
        if (name == "queue-solve") {
            queue_solve(cfg, csv);
        } else if (name == "optimize-m") {
            optimize_m(cfg, csv);
        } else if (name == "tradeoff-sweep") {
            tradeoff(cfg, csv);
        } else if (name == "wind-welfare") {
            wind_welfare(cfg, csv);
        } else if (name == "procure-single") {
            procure_single(cfg, csv);
        } else if (name == "procure-double") {
            return procure_double(cfg, csv, diag);
        } else if (name == "simulate") {
            simulate(cfg, csv);
        } else if (name == "contract-sweep") {
            contract(cfg, csv);
        } else {
            diag << "unknown subcommand '" << name << "'\n";
            return kExitConfig;
        }
    } catch (const ConfigError& e) {
        diag << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        diag << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        diag << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace pdlc
