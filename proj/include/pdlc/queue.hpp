#pragma once

// Steady state of the binary-information closed queue: N appliances cycle
// between idle (request rate lambda) and the packet queue served by m
// servers, each held packet ending in a departure with probability
// 1 - exp(-mu * delta).

#include <span>
#include <vector>

namespace pdlc {

struct QueueParams {
    int n_appliances = 1;
    int m_servers = 1;
    double delta = 60.0;   ///< packet length (s)
    double lambda = 1.0 / 600.0;
    double mu = 1.0 / 600.0;

    void validate() const;
    QueueParams with_servers(int m) const;
    QueueParams with_delta(double d) const;
    bool operator==(const QueueParams&) const = default;
};

struct QueueSolution {
    std::vector<double> p;         ///< P(x requesting), x = 0..N
    std::vector<double> p_served;  ///< P(n packets in use), n = 0..m
    double q_mean = 0.0;           ///< Q: mean number requesting
    double lambda_ave = 0.0;       ///< effective arrival rate lambda (N - Q)
    double s_time = 0.0;           ///< mean sojourn Q / lambda_ave (s)
    double w_extra = 0.0;          ///< sojourn beyond the free-running on time 1/mu (s)
    double var_served = 0.0;
    double excess = 0.0;           ///< Ex: expected idle packets
    double deficiency = 0.0;       ///< De: expected unserved requests
    double throughput = 0.0;       ///< completed duty cycles per second
    double service_rate = 0.0;     ///< per-server departure rate (1 - e^{-mu delta}) / delta
};

/// r = lambda delta / (1 - exp(-mu delta)), with the lambda/mu limit for tiny mu delta.
double packet_ratio(double lambda, double mu, double delta);

/// Departure rate of one held server, (1 - exp(-mu delta)) / delta. Tends to mu
/// as delta -> 0 and satisfies lambda / r exactly.
double effective_service_rate(double mu, double delta);

QueueSolution steady_state(const QueueParams& params);

struct TradeoffRow {
    int m = 0;
    double delta = 0.0;
    double var_served = 0.0;
    double w_extra = 0.0;
    bool operator==(const TradeoffRow&) const = default;
};

/// One row per (m, delta), m outer and delta inner.
std::vector<TradeoffRow> tradeoff_sweep(const QueueParams& base, std::span<const int> m_grid,
                                        std::span<const double> delta_grid);

}  // namespace pdlc
