#pragma once

#include "pdlc/metrics.hpp"
#include "pdlc/quadrature.hpp"

namespace pdlc {

/// Gaussian wind forecast: delivered packets P_v ~ N(p_r, sigma^2). In the
/// correlated model sigma = cv * p_r (an aggregate of identical turbines).
struct WindSpec {
    double p_r = 0.0;
    double sigma = 0.0;
    double cv = 0.0;
    bool correlated = false;

    static WindSpec fixed(double p_r, double sigma);
    static WindSpec proportional(double p_r, double cv);

    double stddev() const { return correlated ? cv * p_r : sigma; }
    void validate() const;
    bool operator==(const WindSpec&) const = default;
};

/// E[W_c(p_t + P_v)] for P_v ~ N(p_r, sigma^2).
double expected_welfare(double p_r, double p_t, double sigma, const WelfareCurve& curve,
                        const Quadrature& quad);

/// argmin over P_t in [0, N + 6 sigma] of k_t P_t + expected_welfare, the
/// smallest minimiser on plateaus, to 1e-4 packets.
double optimal_pt_given_wind(double p_r, double sigma, const WelfareCurve& curve,
                             const Quadrature& quad, double k_t = 0.0);

/// F(p_r, sigma) = min over P_t of expected_welfare.
double optimal_cost_F(double p_r, double sigma, const WelfareCurve& curve, const Quadrature& quad);

/// Score of the correlated wind density with respect to the reservation:
///   d/dp_r log N(p_v; p_r, (cv p_r)^2) = (p_v (p_v - p_r) / (cv p_r)^2 - 1) / p_r.
double score_function(double p_v, double p_r, double cv);

}  // namespace pdlc
