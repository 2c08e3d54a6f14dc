#pragma once

// Monte-Carlo counterparts of the analytic models: the binary-information
// packet queue and the full-information thermal fleet.

#include <cstdint>
#include <span>
#include <vector>

#include "pdlc/queue.hpp"
#include "pdlc/thermal.hpp"

namespace pdlc {

enum class BinaryModel : std::uint8_t {
    /// The protocol as operated: requests queue FIFO until the next interval
    /// boundary, at most m are granted per interval, and every packet holder
    /// re-requests with probability exp(-mu delta) at the end of its packet.
    Slotted,
    /// The continuous-time chain behind steady_state: arrivals at
    /// lambda (N - x), departures at rate (1 - exp(-mu delta)) / delta per server.
    Chain,
};

struct SimConfig {
    long events = 1'000'000;      ///< binary: request events per replication
    double horizon = 86'400.0;    ///< full information: simulated seconds
    std::uint64_t seed = 1;
    int replications = 1;
    double warmup_fraction = 0.1;  ///< share of events discarded before statistics
    int batches = 20;             ///< batch means for standard errors of a single replication
    BinaryModel model = BinaryModel::Slotted;
    LowerEdge lower_edge = LowerEdge::Clamp;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct SimReport {
    std::vector<double> empirical_p;  ///< time share with x requesting, x = 0..N
    double empirical_w = 0.0;         ///< mean sojourn beyond 1/mu (s)
    double w_stderr = 0.0;
    double empirical_var = 0.0;       ///< variance of packets in use per interval
    std::vector<int> grants;          ///< packets granted per interval (first replication)
    double q_mean = 0.0;              ///< time-average number requesting
    double q_stderr = 0.0;
    double arrival_rate = 0.0;        ///< requests per second
    double sojourn = 0.0;             ///< mean request-to-departure time (s)
    double sojourn_stderr = 0.0;
    long events = 0;                  ///< request events counted after warm-up
    long departures = 0;

    long band_violations = 0;         ///< (room, interval) pairs leaving the band
    double max_violation = 0.0;       ///< degC
    double mean_on_time = 0.0;        ///< full information dwell statistics (s)
    double mean_off_time = 0.0;
    long on_periods = 0;
    long off_periods = 0;

    bool operator==(const SimReport&) const = default;
};

SimReport simulate_binary(const QueueParams& qp, const SimConfig& cfg);

/// Steps the fleet from `initial` for cfg.horizon seconds with m packets of
/// length delta per interval. Disturbances are drawn uniformly from
/// [-w_max, w_max] per room and interval.
SimReport simulate_full_info(std::span<const ApplianceState> initial,
                             std::span<const OccupantPrefs> prefs, const ThermalParams& p,
                             int m, double delta, const SimConfig& cfg);

/// Total-variation distance between two distributions on the same support.
double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace pdlc
