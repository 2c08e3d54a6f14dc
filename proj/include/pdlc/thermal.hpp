#pragma once

// Thermal model of a duty-cycle cooling appliance:
//
//     dT/dt = (T_out - T - T_g * u + w) / tau
//
// and the full-information packet allocator built on top of it.

#include <cstdint>
#include <span>
#include <vector>

namespace pdlc {

enum class Mode : std::uint8_t { Off, On };

struct ThermalParams {
    double t_out = 32.0;        ///< outside temperature (degC)
    double t_gain = 16.0;       ///< temperature gain while running (degC)
    double tau = 3600.0;        ///< thermal time constant (s)
    double w_max = 0.0;         ///< disturbance bound (degC)
    double rated_power = 1.0;   ///< power drawn per packet (kW)

    void validate() const;
    bool operator==(const ThermalParams&) const = default;
};

/// Comfort band [t_set - band, t_set + band].
struct OccupantPrefs {
    double t_set = 24.0;
    double band = 1.0;

    double lower() const { return t_set - band; }
    double upper() const { return t_set + band; }
    /// Checks band > 0 and that the band sits below t_out.
    void validate(const ThermalParams& p) const;
    bool operator==(const OccupantPrefs&) const = default;
};

struct ApplianceState {
    int id = 0;
    double temp = 0.0;
    Mode mode = Mode::Off;
};

struct DutyRates {
    double lambda = 0.0;  ///< idle -> request rate, 1 / (mean off time)
    double mu = 0.0;      ///< on-completion rate, 1 / (mean on time)
};

/// Exact solution of the linear ODE over `dt` with constant `u` and `w`.
double step_temperature(double temp, const ThermalParams& p, Mode u, double dt, double w = 0.0);
double step_temperature(const ApplianceState& s, const ThermalParams& p, Mode u, double dt,
                        double w = 0.0);

/// Time for the temperature to move from `from` to `to` under constant `u`
/// (w = 0). Returns +inf when `to` is not reachable.
double crossing_time(double from, double to, const ThermalParams& p, Mode u);

/// Minimum packet count ceil((N * t_out - sum t_set) / t_gain), capped at N.
/// Throws std::invalid_argument when no cooling is needed at all.
int min_packets(std::span<const OccupantPrefs> prefs, const ThermalParams& p);

/// Duty-cycle rates implied by the band-crossing times of the thermal model.
DutyRates duty_rates(const ThermalParams& p, const OccupantPrefs& prefs);

/// Temperature drift rate: the band width traversed per mean off time.
double drift_rate_kappa(const OccupantPrefs& prefs, double lambda);

/// Time until the room reaches its upper band edge with the appliance off.
/// Negative when already above; -inf when at or above t_out.
double slack_to_upper(double temp, const OccupantPrefs& prefs, const ThermalParams& p);

/// Grants one packet to each of the min(m, N) most urgent rooms: ascending
/// slack_to_upper, ties broken by ascending id. Result is sorted by id.
std::vector<int> full_info_allocate(std::span<const ApplianceState> states,
                                    std::span<const OccupantPrefs> prefs,
                                    const ThermalParams& p, int m);

// ---------------------------------------------------------------------------
// Fleet stepping shared by the feasibility search and the simulator.

/// What a running appliance does when it reaches its lower band edge.
enum class LowerEdge : std::uint8_t {
    Clamp,       ///< holds the room at the lower edge for the rest of the packet
    Hysteresis,  ///< switches off and waits for the upper edge before running again
};

struct FleetStepStats {
    int grants = 0;
    double max_violation = 0.0;  ///< worst band excursion inside the interval (degC)
    int rooms_violating = 0;
};

struct DwellLog {
    double on_total = 0.0;
    long on_count = 0;
    double off_total = 0.0;
    long off_count = 0;
};

/// Per-appliance bookkeeping needed to measure on/off dwell times.
struct DwellTracker {
    std::vector<double> last_switch;  ///< time of the last mode change, NaN before the first
    DwellLog log;
};

/// Advances every room by one packet interval of length `delta`: allocates m
/// packets, integrates exactly, applies the lower-edge rule. `disturbance`
/// (one value per room, may be empty for w = 0) is held constant over the
/// interval. `now` is the interval start time, used only by `dwell`.
FleetStepStats advance_fleet(std::vector<ApplianceState>& states,
                             std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                             int m, double delta, LowerEdge rule,
                             std::span<const double> disturbance = {},
                             DwellTracker* dwell = nullptr, double now = 0.0);

struct FeasibleDelta {
    double delta = 0.0;
    int grid_index = 0;       ///< j in delta_max * 2^-j
    double delta_max = 0.0;
};

/// Largest delta on the grid delta_max * 2^-j (j = 0..20) for which a
/// deterministic (w = 0) run of `horizon` seconds keeps every room in band.
/// delta_max is the shortest duty on/off time in the fleet. Throws
/// NumericError naming the smallest tested delta and its worst violation.
FeasibleDelta find_feasible_delta(std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                                  int m, double horizon,
                                  std::span<const ApplianceState> initial);

}  // namespace pdlc
