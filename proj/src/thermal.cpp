#include "pdlc/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEdgeTol = 1e-12;

double equilibrium(const ThermalParams& p, Mode u, double w) {
    return p.t_out - (u == Mode::On ? p.t_gain : 0.0) + w;
}

double relax(double temp, double t_eq, double dt, double tau) {
    return t_eq + (temp - t_eq) * std::exp(-dt / tau);
}

double time_towards(double from, double to, double t_eq, double tau) {
    if (from == to) return 0.0;
    const double a = from - t_eq;
    const double b = to - t_eq;
    if (a == 0.0 || a * b <= 0.0 || std::abs(b) >= std::abs(a)) return kInf;
    return tau * std::log(a / b);
}

}  // namespace

void ThermalParams::validate() const {
    require(std::isfinite(t_out) && std::isfinite(t_gain) && std::isfinite(tau) &&
                std::isfinite(w_max) && std::isfinite(rated_power),
            "thermal parameters must be finite");
    require(tau > 0.0, "tau must be positive");
    require(t_gain > 0.0, "t_gain must be positive");
    require(w_max >= 0.0, "w_max must be non-negative");
    require(rated_power > 0.0, "rated_power must be positive");
}

void OccupantPrefs::validate(const ThermalParams& p) const {
    require(std::isfinite(t_set) && std::isfinite(band), "preferences must be finite");
    require(band > 0.0, "comfort band must be positive");
    require(upper() < p.t_out, "t_set + band must be below t_out (cooling regime)");
}

double step_temperature(double temp, const ThermalParams& p, Mode u, double dt, double w) {
    require(std::isfinite(temp) && std::isfinite(dt) && std::isfinite(w),
            "step_temperature: non-finite input");
    require(dt > 0.0, "step_temperature: dt must be positive");
    require(std::abs(w) <= p.w_max * (1.0 + 1e-12), "step_temperature: |w| exceeds w_max");
    return relax(temp, equilibrium(p, u, w), dt, p.tau);
}

double step_temperature(const ApplianceState& s, const ThermalParams& p, Mode u, double dt,
                        double w) {
    return step_temperature(s.temp, p, u, dt, w);
}

double crossing_time(double from, double to, const ThermalParams& p, Mode u) {
    return time_towards(from, to, equilibrium(p, u, 0.0), p.tau);
}

int min_packets(std::span<const OccupantPrefs> prefs, const ThermalParams& p) {
    require(!prefs.empty(), "min_packets: empty fleet");
    p.validate();
    const auto n = static_cast<double>(prefs.size());
    const double sum_set = std::accumulate(prefs.begin(), prefs.end(), 0.0,
                                           [](double acc, const OccupantPrefs& o) {
                                               return acc + o.t_set;
                                           });
    const double raw = (n * p.t_out - sum_set) / p.t_gain;
    require(raw > 0.0, "min_packets: no cooling needed (N*t_out <= sum of set points)");
    // Absorb roundoff so that exact integers are not bumped up by one.
    const double m = std::ceil(raw - 1e-9 * std::max(1.0, raw));
    return static_cast<int>(std::min(m, n));
}

DutyRates duty_rates(const ThermalParams& p, const OccupantPrefs& prefs) {
    p.validate();
    prefs.validate(p);
    const double lo = prefs.lower();
    const double hi = prefs.upper();
    const double eq_on = p.t_out - p.t_gain;
    require(lo > eq_on, "duty_rates: lower band edge at or below the running equilibrium");
    const double off_time = p.tau * std::log((p.t_out - lo) / (p.t_out - hi));
    const double on_time = p.tau * std::log((hi - eq_on) / (lo - eq_on));
    return {1.0 / off_time, 1.0 / on_time};
}

double drift_rate_kappa(const OccupantPrefs& prefs, double lambda) {
    require(lambda > 0.0, "drift_rate_kappa: lambda must be positive");
    return 2.0 * prefs.band * lambda;
}

double slack_to_upper(double temp, const OccupantPrefs& prefs, const ThermalParams& p) {
    if (temp >= p.t_out) return -kInf;
    return p.tau * std::log((p.t_out - temp) / (p.t_out - prefs.upper()));
}

std::vector<int> full_info_allocate(std::span<const ApplianceState> states,
                                    std::span<const OccupantPrefs> prefs,
                                    const ThermalParams& p, int m) {
    require(states.size() == prefs.size(), "full_info_allocate: states/prefs size mismatch");
    require(m >= 0, "full_info_allocate: negative packet count");
    const std::size_t n = states.size();
    const std::size_t grants = std::min(static_cast<std::size_t>(m), n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> slack(n);
    for (std::size_t i = 0; i < n; ++i) slack[i] = slack_to_upper(states[i].temp, prefs[i], p);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(grants),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (slack[a] != slack[b]) return slack[a] < slack[b];
                          return states[a].id < states[b].id;
                      });

    std::vector<int> ids;
    ids.reserve(grants);
    for (std::size_t k = 0; k < grants; ++k) ids.push_back(states[order[k]].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace {

struct RoomStepper {
    const ThermalParams& p;
    const OccupantPrefs& pref;
    double w;
    double worst = 0.0;  // largest band excursion seen

    void observe(double temp) {
        worst = std::max({worst, temp - pref.upper(), pref.lower() - temp});
    }
    double eq(Mode u) const { return equilibrium(p, u, w); }
};

void switch_mode(ApplianceState& s, std::size_t idx, Mode next, double when, DwellTracker* dwell) {
    if (s.mode == next) return;
    if (dwell != nullptr) {
        double& last = dwell->last_switch[idx];
        if (!std::isnan(last)) {
            const double span = when - last;
            if (s.mode == Mode::On) {
                dwell->log.on_total += span;
                ++dwell->log.on_count;
            } else {
                dwell->log.off_total += span;
                ++dwell->log.off_count;
            }
        }
        last = when;
    }
    s.mode = next;
}

// Clamp rule: a granted appliance runs while above the lower edge and then
// holds the room there; a room below the edge drifts up to it first.
void advance_clamped(ApplianceState& s, RoomStepper& r, bool granted, double delta,
                     std::size_t idx, DwellTracker* dwell, double now) {
    switch_mode(s, idx, granted ? Mode::On : Mode::Off, now, dwell);
    if (!granted) {
        s.temp = relax(s.temp, r.eq(Mode::Off), delta, r.p.tau);
        r.observe(s.temp);
        return;
    }
    const double lo = r.pref.lower();
    double t = 0.0;
    while (t < delta) {
        const double rest = delta - t;
        if (s.temp > lo + kEdgeTol) {
            const double hit = time_towards(s.temp, lo, r.eq(Mode::On), r.p.tau);
            if (hit >= rest) {
                s.temp = relax(s.temp, r.eq(Mode::On), rest, r.p.tau);
                t = delta;
            } else {
                s.temp = lo;
                t += hit;
            }
        } else if (s.temp >= lo - kEdgeTol) {
            if (r.eq(Mode::On) <= lo) {
                s.temp = lo;
            } else {
                s.temp = relax(s.temp, r.eq(Mode::On), rest, r.p.tau);
            }
            t = delta;
        } else {
            const double hit = time_towards(s.temp, lo, r.eq(Mode::Off), r.p.tau);
            if (hit >= rest) {
                s.temp = relax(s.temp, r.eq(Mode::Off), rest, r.p.tau);
                t = delta;
            } else {
                s.temp = lo;
                t += hit;
            }
        }
        r.observe(s.temp);
    }
}

// Hysteresis rule: the appliance keeps its own thermostat and runs only while
// it both wants to (from the upper edge down to the lower edge) and holds a
// grant. A room that lost its grant mid-cycle restarts from the upper edge.
void advance_hysteresis(ApplianceState& s, RoomStepper& r, bool granted, double delta,
                        std::size_t idx, DwellTracker* dwell, double now) {
    if (!granted) {
        switch_mode(s, idx, Mode::Off, now, dwell);
        s.temp = relax(s.temp, r.eq(Mode::Off), delta, r.p.tau);
        r.observe(s.temp);
        return;
    }
    bool wants_on = s.mode == Mode::On || s.temp >= r.pref.upper();
    double t = 0.0;
    while (t < delta) {
        const double rest = delta - t;
        const Mode u = wants_on ? Mode::On : Mode::Off;
        const double edge = wants_on ? r.pref.lower() : r.pref.upper();
        switch_mode(s, idx, u, now + t, dwell);
        const double hit = time_towards(s.temp, edge, r.eq(u), r.p.tau);
        if (hit >= rest) {
            s.temp = relax(s.temp, r.eq(u), rest, r.p.tau);
            t = delta;
        } else {
            s.temp = edge;
            t += hit;
            wants_on = !wants_on;
        }
        r.observe(s.temp);
    }
    switch_mode(s, idx, wants_on ? Mode::On : Mode::Off, now + delta, dwell);
}

}  // namespace

FleetStepStats advance_fleet(std::vector<ApplianceState>& states,
                             std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                             int m, double delta, LowerEdge rule,
                             std::span<const double> disturbance, DwellTracker* dwell,
                             double now) {
    require(states.size() == prefs.size(), "advance_fleet: states/prefs size mismatch");
    require(disturbance.empty() || disturbance.size() == states.size(),
            "advance_fleet: disturbance size mismatch");
    require(delta > 0.0, "advance_fleet: delta must be positive");
    if (dwell != nullptr && dwell->last_switch.size() != states.size()) {
        dwell->last_switch.assign(states.size(), std::numeric_limits<double>::quiet_NaN());
    }

    const std::vector<int> granted_ids = full_info_allocate(states, prefs, p, m);
    FleetStepStats stats;
    stats.grants = static_cast<int>(granted_ids.size());

    for (std::size_t i = 0; i < states.size(); ++i) {
        auto& s = states[i];
        const bool granted = std::binary_search(granted_ids.begin(), granted_ids.end(), s.id);
        const double w = disturbance.empty() ? 0.0 : disturbance[i];
        require(std::abs(w) <= p.w_max * (1.0 + 1e-12), "advance_fleet: |w| exceeds w_max");
        RoomStepper r{p, prefs[i], w};
        r.observe(s.temp);
        if (rule == LowerEdge::Clamp) {
            advance_clamped(s, r, granted, delta, i, dwell, now);
        } else {
            advance_hysteresis(s, r, granted, delta, i, dwell, now);
        }
        if (r.worst > 1e-9) {
            ++stats.rooms_violating;
            stats.max_violation = std::max(stats.max_violation, r.worst);
        }
    }
    return stats;
}

FeasibleDelta find_feasible_delta(std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                                  int m, double horizon,
                                  std::span<const ApplianceState> initial) {
    require(!prefs.empty(), "find_feasible_delta: empty fleet");
    require(prefs.size() == initial.size(), "find_feasible_delta: prefs/initial size mismatch");
    require(m >= 0 && m <= static_cast<int>(prefs.size()),
            "find_feasible_delta: m must lie in [0, N]");
    require(horizon > 0.0, "find_feasible_delta: horizon must be positive");
    for (std::size_t i = 0; i < prefs.size(); ++i) {
        require(initial[i].temp >= prefs[i].lower() && initial[i].temp <= prefs[i].upper(),
                "find_feasible_delta: initial temperature outside comfort band");
    }

    double delta_max = std::numeric_limits<double>::infinity();
    for (const auto& pref : prefs) {
        const DutyRates rates = duty_rates(p, pref);
        delta_max = std::min({delta_max, 1.0 / rates.lambda, 1.0 / rates.mu});
    }

    constexpr int kMaxLevel = 20;
    double worst_at_smallest = 0.0;
    double smallest = delta_max;
    for (int j = 0; j <= kMaxLevel; ++j) {
        const double delta = std::ldexp(delta_max, -j);
        std::vector<ApplianceState> states(initial.begin(), initial.end());
        const auto steps = static_cast<long>(std::ceil(horizon / delta - 1e-9));
        double worst = 0.0;
        for (long k = 0; k < steps && worst <= 1e-9; ++k) {
            worst = std::max(worst, advance_fleet(states, prefs, p, m, delta, LowerEdge::Clamp)
                                        .max_violation);
        }
        if (worst <= 1e-9) return {delta, j, delta_max};
        smallest = delta;
        worst_at_smallest = worst;
    }
    std::ostringstream msg;
    msg << "find_feasible_delta: no feasible packet length; smallest tested delta " << smallest
        << " s violates the band by " << worst_at_smallest << " degC";
    throw NumericError(msg.str());
}

}  // namespace pdlc
