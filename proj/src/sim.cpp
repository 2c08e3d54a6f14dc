#include "pdlc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

void SimConfig::validate() const {
    require(events > 0, "SimConfig: events must be positive");
    require(std::isfinite(horizon) && horizon > 0.0, "SimConfig: horizon must be positive");
    require(replications >= 1, "SimConfig: replications must be at least 1");
    require(warmup_fraction >= 0.0 && warmup_fraction < 1.0,
            "SimConfig: warmup_fraction must lie in [0, 1)");
    require(batches >= 2, "SimConfig: batches must be at least 2");
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "total_variation: support size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

namespace {

std::mt19937_64 replication_rng(std::uint64_t seed, int rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep)};
    return std::mt19937_64(seq);
}

struct Batch {
    double time = 0.0;
    double area = 0.0;  // integral of x over time
    double wait_sum = 0.0;
    long departures = 0;
};

// Statistics shared by both binary models. Everything is gathered only once
// `active` is set; batches split the measured arrivals evenly.
class BinaryStats {
public:
    BinaryStats(int n, int m, double mu, long measured_events, int batches)
        : hist_(static_cast<std::size_t>(n) + 1, 0.0),
          m_(m),
          inv_mu_(1.0 / mu),
          per_batch_(std::max(1L, measured_events / batches)),
          batches_(static_cast<std::size_t>(batches)) {}

    void hold(int x, double dt) {
        if (!active || dt <= 0.0) return;
        hist_[static_cast<std::size_t>(x)] += dt;
        const double s = std::min(x, m_);
        served_sum_ += s * dt;
        served_sq_ += s * s * dt;
        Batch& b = batches_[current()];
        b.time += dt;
        b.area += x * dt;
        time_ += dt;
        area_ += x * dt;
    }

    void arrival() {
        if (!active) return;
        ++arrivals_;
    }

    void departure(double sojourn) {
        if (!active) return;
        Batch& b = batches_[current()];
        b.wait_sum += sojourn;
        ++b.departures;
        wait_sum_ += sojourn;
        ++departures_;
    }

    void grants(int g) {
        if (!active) return;
        grant_sum_ += g;
        grant_sq_ += static_cast<double>(g) * g;
        ++intervals_;
    }

    bool active = false;

    std::vector<double> hist_;
    double served_sum_ = 0.0, served_sq_ = 0.0;
    double grant_sum_ = 0.0, grant_sq_ = 0.0;
    long intervals_ = 0;
    double time_ = 0.0, area_ = 0.0, wait_sum_ = 0.0;
    long arrivals_ = 0, departures_ = 0;
    int m_;
    double inv_mu_;
    long per_batch_;
    std::vector<Batch> batches_;

private:
    std::size_t current() const {
        return std::min(batches_.size() - 1, static_cast<std::size_t>(arrivals_ / per_batch_));
    }
};

void run_slotted(const QueueParams& qp, const SimConfig& cfg, std::mt19937_64& rng,
                 BinaryStats& st, std::vector<int>* series) {
    const int n = qp.n_appliances;
    const double delta = qp.delta;
    const double keep = std::exp(-qp.mu * qp.delta);
    const long warm = static_cast<long>(cfg.warmup_fraction * static_cast<double>(cfg.events));
    std::exponential_distribution<double> idle_time(qp.lambda);
    std::bernoulli_distribution again(keep);

    using Pending = std::pair<double, int>;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> idle;
    for (int i = 0; i < n; ++i) idle.emplace(idle_time(rng), i);
    std::vector<double> requested(static_cast<std::size_t>(n), 0.0);
    std::deque<int> fifo;
    std::vector<int> served;
    served.reserve(static_cast<std::size_t>(qp.m_servers));

    long events = 0;
    for (long k = 0;; ++k) {
        const double t0 = static_cast<double>(k) * delta;
        const double t1 = t0 + delta;

        for (int id : served) {
            if (again(rng)) {
                fifo.push_back(id);
            } else {
                st.departure(t0 - requested[static_cast<std::size_t>(id)]);
                idle.emplace(t0 + idle_time(rng), id);
            }
        }
        served.clear();

        if (events >= cfg.events) break;
        if (!st.active && events >= warm) st.active = true;

        while (!fifo.empty() && static_cast<int>(served.size()) < qp.m_servers) {
            served.push_back(fifo.front());
            fifo.pop_front();
        }
        const int g = static_cast<int>(served.size());
        st.grants(g);
        if (series != nullptr && st.active) series->push_back(g);

        int x = static_cast<int>(fifo.size()) + g;
        double now = t0;
        while (!idle.empty() && idle.top().first < t1) {
            const auto [t, id] = idle.top();
            idle.pop();
            st.hold(x, t - now);
            now = t;
            ++x;
            requested[static_cast<std::size_t>(id)] = t;
            fifo.push_back(id);
            st.arrival();
            ++events;
        }
        st.hold(x, t1 - now);
    }
}

void run_chain(const QueueParams& qp, const SimConfig& cfg, std::mt19937_64& rng,
               BinaryStats& st, std::vector<int>* series) {
    const int n = qp.n_appliances;
    const int m = qp.m_servers;
    const double nu = effective_service_rate(qp.mu, qp.delta);
    const long warm = static_cast<long>(cfg.warmup_fraction * static_cast<double>(cfg.events));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> idle(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idle[static_cast<std::size_t>(i)] = i;
    std::deque<int> fifo;
    std::vector<double> requested(static_cast<std::size_t>(n), 0.0);

    double now = 0.0;
    double next_sample = 0.0;
    long events = 0;
    while (events < cfg.events) {
        if (!st.active && events >= warm) st.active = true;
        const int x = static_cast<int>(fifo.size());
        const int s = std::min(x, m);
        const double a_rate = qp.lambda * (n - x);
        const double d_rate = nu * s;
        const double total = a_rate + d_rate;
        const double dt = std::exponential_distribution<double>(total)(rng);

        while (series != nullptr && st.active && next_sample < now + dt) {
            series->push_back(s);
            next_sample += qp.delta;
        }
        if (!st.active) next_sample = now + dt;
        st.hold(x, dt);
        now += dt;

        const double u = unit(rng) * total;
        if (u < a_rate) {
            const auto pick = std::min(idle.size() - 1,
                                       static_cast<std::size_t>(unit(rng) * idle.size()));
            const int id = idle[pick];
            idle[pick] = idle.back();
            idle.pop_back();
            requested[static_cast<std::size_t>(id)] = now;
            fifo.push_back(id);
            st.arrival();
            ++events;
        } else {
            const auto pick = std::min(static_cast<std::size_t>(s - 1),
                                       static_cast<std::size_t>(unit(rng) * s));
            const int id = fifo[pick];
            fifo.erase(fifo.begin() + static_cast<std::ptrdiff_t>(pick));
            st.departure(now - requested[static_cast<std::size_t>(id)]);
            idle.push_back(id);
        }
    }
}

double batch_stderr(const std::vector<double>& xs) {
    const auto k = static_cast<double>(xs.size());
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (k - 1.0) / k);
}

}  // namespace

SimReport simulate_binary(const QueueParams& qp, const SimConfig& cfg) {
    qp.validate();
    cfg.validate();
    const int n = qp.n_appliances;
    const long warm = static_cast<long>(cfg.warmup_fraction * static_cast<double>(cfg.events));

    SimReport rep;
    rep.empirical_p.assign(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> batch_w, batch_q;
    double time = 0.0, area = 0.0, wait_sum = 0.0, served_sum = 0.0, served_sq = 0.0;
    double grant_sum = 0.0, grant_sq = 0.0;
    long intervals = 0;

    for (int r = 0; r < cfg.replications; ++r) {
        auto rng = replication_rng(cfg.seed, r);
        BinaryStats st(n, qp.m_servers, qp.mu, cfg.events - warm, cfg.batches);
        std::vector<int>* series = r == 0 ? &rep.grants : nullptr;
        if (cfg.model == BinaryModel::Slotted) {
            run_slotted(qp, cfg, rng, st, series);
        } else {
            run_chain(qp, cfg, rng, st, series);
        }
        for (std::size_t x = 0; x < st.hist_.size(); ++x) rep.empirical_p[x] += st.hist_[x];
        time += st.time_;
        area += st.area_;
        wait_sum += st.wait_sum_;
        served_sum += st.served_sum_;
        served_sq += st.served_sq_;
        grant_sum += st.grant_sum_;
        grant_sq += st.grant_sq_;
        intervals += st.intervals_;
        rep.events += st.arrivals_;
        rep.departures += st.departures_;
        for (const Batch& b : st.batches_) {
            if (b.departures > 0) batch_w.push_back(b.wait_sum / static_cast<double>(b.departures));
            if (b.time > 0.0) batch_q.push_back(b.area / b.time);
        }
    }

    if (time <= 0.0 || rep.departures == 0) {
        throw NumericError("simulate_binary: no statistics collected after warm-up");
    }
    for (double& v : rep.empirical_p) v /= time;
    rep.q_mean = area / time;
    rep.q_stderr = batch_stderr(batch_q);
    rep.arrival_rate = static_cast<double>(rep.events) / time;
    rep.sojourn = wait_sum / static_cast<double>(rep.departures);
    rep.sojourn_stderr = batch_stderr(batch_w);
    rep.empirical_w = rep.sojourn - 1.0 / qp.mu;
    rep.w_stderr = rep.sojourn_stderr;
    if (cfg.model == BinaryModel::Slotted && intervals > 0) {
        const double mean = grant_sum / static_cast<double>(intervals);
        rep.empirical_var = grant_sq / static_cast<double>(intervals) - mean * mean;
    } else {
        const double mean = served_sum / time;
        rep.empirical_var = served_sq / time - mean * mean;
    }
    rep.empirical_var = std::max(0.0, rep.empirical_var);
    return rep;
}

SimReport simulate_full_info(std::span<const ApplianceState> initial,
                             std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                             int m, double delta, const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    require(!initial.empty(), "simulate_full_info: empty fleet");
    require(initial.size() == prefs.size(), "simulate_full_info: fleet/prefs size mismatch");
    require(m >= 0 && m <= static_cast<int>(initial.size()),
            "simulate_full_info: m must lie in [0, N]");
    require(std::isfinite(delta) && delta > 0.0, "simulate_full_info: delta must be positive");
    for (const auto& pref : prefs) pref.validate(p);

    const auto steps = static_cast<long>(std::ceil(cfg.horizon / delta - 1e-9));
    SimReport rep;
    DwellLog total;
    for (int r = 0; r < cfg.replications; ++r) {
        auto rng = replication_rng(cfg.seed, r);
        std::uniform_real_distribution<double> noise(-p.w_max, p.w_max);
        std::vector<ApplianceState> states(initial.begin(), initial.end());
        std::vector<double> w(p.w_max > 0.0 ? states.size() : 0, 0.0);
        DwellTracker dwell;
        for (long k = 0; k < steps; ++k) {
            for (double& v : w) v = noise(rng);
            const double now = static_cast<double>(k) * delta;
            const FleetStepStats s =
                advance_fleet(states, prefs, p, m, delta, cfg.lower_edge, w, &dwell, now);
            if (r == 0) rep.grants.push_back(s.grants);
            rep.band_violations += s.rooms_violating;
            rep.max_violation = std::max(rep.max_violation, s.max_violation);
        }
        total.on_total += dwell.log.on_total;
        total.on_count += dwell.log.on_count;
        total.off_total += dwell.log.off_total;
        total.off_count += dwell.log.off_count;
    }
    rep.on_periods = total.on_count;
    rep.off_periods = total.off_count;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.mean_on_time = total.on_count > 0 ? total.on_total / static_cast<double>(total.on_count) : nan;
    rep.mean_off_time =
        total.off_count > 0 ? total.off_total / static_cast<double>(total.off_count) : nan;
    return rep;
}

}  // namespace pdlc
