#include "pdlc/queue.hpp"

#include <algorithm>
#include <cmath>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

namespace {

constexpr int kMaxAppliances = 1'000'000;
constexpr double kSeriesCutoff = 1e-8;

}  // namespace

void QueueParams::validate() const {
    require(n_appliances >= 1, "queue: N must be at least 1");
    require(n_appliances <= kMaxAppliances, "queue: N above the 10^6 guard");
    require(m_servers >= 1 && m_servers <= n_appliances, "queue: m must lie in [1, N]");
    require(std::isfinite(delta) && delta > 0.0, "queue: delta must be positive");
    require(std::isfinite(lambda) && lambda > 0.0, "queue: lambda must be positive");
    require(std::isfinite(mu) && mu > 0.0, "queue: mu must be positive");
}

QueueParams QueueParams::with_servers(int m) const {
    QueueParams q = *this;
    q.m_servers = m;
    return q;
}

QueueParams QueueParams::with_delta(double d) const {
    QueueParams q = *this;
    q.delta = d;
    return q;
}

double packet_ratio(double lambda, double mu, double delta) {
    require(delta > 0.0, "packet_ratio: delta must be positive");
    const double x = mu * delta;
    if (x < kSeriesCutoff) return lambda / mu * (1.0 + 0.5 * x);
    return lambda * delta / -std::expm1(-x);
}

double effective_service_rate(double mu, double delta) {
    require(delta > 0.0, "effective_service_rate: delta must be positive");
    const double x = mu * delta;
    if (x < kSeriesCutoff) return mu * (1.0 - 0.5 * x);
    return -std::expm1(-x) / delta;
}

QueueSolution steady_state(const QueueParams& params) {
    params.validate();
    const int n = params.n_appliances;
    const int m = params.m_servers;
    const double r = packet_ratio(params.lambda, params.mu, params.delta);
    const double log_r = std::log(r);
    const double log_m = std::log(static_cast<double>(m));
    const double lgamma_n1 = std::lgamma(n + 1.0);
    const double lgamma_m1 = std::lgamma(m + 1.0);

    // Unnormalised log weights: C(N,x) r^x, times x! / (m^{x-m} m!) once x >= m.
    std::vector<double> log_w(static_cast<std::size_t>(n) + 1);
    for (int x = 0; x <= n; ++x) {
        double lw = lgamma_n1 - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) + x * log_r;
        if (x >= m) lw += std::lgamma(x + 1.0) - (x - m) * log_m - lgamma_m1;
        log_w[static_cast<std::size_t>(x)] = lw;
    }
    const double peak = *std::max_element(log_w.begin(), log_w.end());
    QueueSolution s;
    s.p.resize(log_w.size());
    double total = 0.0;
    for (std::size_t x = 0; x < log_w.size(); ++x) {
        s.p[x] = std::exp(log_w[x] - peak);
        total += s.p[x];
    }
    for (double& v : s.p) v /= total;

    s.p_served.assign(static_cast<std::size_t>(m) + 1, 0.0);
    for (int x = 0; x <= n; ++x) {
        const double px = s.p[static_cast<std::size_t>(x)];
        s.p_served[static_cast<std::size_t>(std::min(x, m))] += px;
        s.q_mean += x * px;
        if (x < m) s.excess += (m - x) * px;
        if (x > m) s.deficiency += (x - m) * px;
    }

    double mean_served = 0.0;
    for (int k = 0; k <= m; ++k) mean_served += k * s.p_served[static_cast<std::size_t>(k)];
    for (int k = 0; k <= m; ++k) {
        const double d = k - mean_served;
        s.var_served += d * d * s.p_served[static_cast<std::size_t>(k)];
    }

    s.service_rate = effective_service_rate(params.mu, params.delta);
    s.lambda_ave = params.lambda * (n - s.q_mean);
    s.s_time = s.q_mean / s.lambda_ave;
    s.w_extra = s.s_time - 1.0 / params.mu;
    if (s.w_extra < 0.0 && s.w_extra > -1e-9 * std::max(1.0, s.s_time)) s.w_extra = 0.0;
    s.throughput = s.service_rate * (m - s.excess);
    return s;
}

std::vector<TradeoffRow> tradeoff_sweep(const QueueParams& base, std::span<const int> m_grid,
                                        std::span<const double> delta_grid) {
    require(!m_grid.empty() && !delta_grid.empty(), "tradeoff_sweep: empty grid");
    std::vector<TradeoffRow> rows;
    rows.reserve(m_grid.size() * delta_grid.size());
    for (int m : m_grid) {
        for (double d : delta_grid) {
            const QueueSolution s = steady_state(base.with_servers(m).with_delta(d));
            rows.push_back({m, d, s.var_served, s.w_extra});
        }
    }
    return rows;
}

}  // namespace pdlc
