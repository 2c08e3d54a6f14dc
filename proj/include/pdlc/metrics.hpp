#pragma once

#include <vector>

#include "pdlc/queue.hpp"

namespace pdlc {

/// Welfare cost of a reservation m:
///   W(m) = g(kappa * w_extra(m)) + h_price * Ex(m),  g(t) = g_quad t^2 + g_lin t.
struct WelfareConfig {
    double g_quad = 1.0;   ///< $/degC^2
    double g_lin = 0.0;    ///< $/degC
    double h_price = 0.0;  ///< $ per idle packet
    double kappa = 1.0 / 300.0;  ///< degC/s
    double w_cap = 1e9;    ///< ceiling for the continuous curve left of m = 1

    void validate() const;
    double disutility(double temp_rise) const { return (g_quad * temp_rise + g_lin) * temp_rise; }
    bool operator==(const WelfareConfig&) const = default;
};

/// Relative prices of idle and missing packets in the energy metric.
struct EnergyWeights {
    double excess = 1.0;
    double deficiency = 1.0;
    bool operator==(const EnergyWeights&) const = default;
};

/// E(m) = Ex(m) + De(m) (weighted) for the base queue with m servers.
double energy_metric(const QueueParams& base, int m, EnergyWeights weights = {});

/// Smallest minimiser of E over m = 1..N.
int optimize_m_energy(const QueueParams& base, EnergyWeights weights = {});

double welfare_metric(const QueueParams& base, int m, const WelfareConfig& cfg);

/// Smallest minimiser of W over m = 1..N.
int optimize_m_welfare(const QueueParams& base, const WelfareConfig& cfg);

/// Continuous extension of the welfare metric used wherever the packet count
/// is a real number (wind, markets).
///
/// Piecewise linear through W(1..N). Beyond N it is flat, or continues the
/// [N-1, N] slope when that slope is positive so the curve stays convex. Left
/// of 1 it continues the [1, 2] slope and is clamped above by w_cap.
/// Construction rejects integer samples that are not convex.
class WelfareCurve {
public:
    WelfareCurve(std::vector<double> samples, double w_cap);

    static WelfareCurve build(const QueueParams& base, const WelfareConfig& cfg);

    double operator()(double m) const;
    /// One-sided derivatives.
    double right_slope(double m) const;
    double left_slope(double m) const;
    /// Smallest kink strictly greater than m, +inf when none.
    double next_breakpoint(double m) const;
    /// Point left of which the cap is active, -inf when the cap is never reached.
    double cap_point() const { return cap_point_; }
    /// Kinks of the curve: the cap point (when finite) and 1, ..., N.
    std::vector<double> knots() const;
    /// Slope of the linear continuation left of m = 1 (ignoring the cap).
    double extrapolation_slope() const { return left_slope_; }

    int n() const { return static_cast<int>(samples_.size()); }
    double sample(int m) const { return samples_[static_cast<std::size_t>(m - 1)]; }
    double w_cap() const { return w_cap_; }
    /// Smallest minimiser over [1, N].
    double argmin() const;

private:
    std::vector<double> samples_;  // W(1), ..., W(N)
    double w_cap_;
    double left_slope_;            // slope of [1, 2], 0 when N == 1
    double right_slope_;           // slope beyond N, never negative
    double cap_point_;
};

}  // namespace pdlc
