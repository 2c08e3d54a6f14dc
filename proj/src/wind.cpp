#include "pdlc/wind.hpp"

#include <cmath>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

namespace {
constexpr double kPtTolerance = 1e-4;
}

WindSpec WindSpec::fixed(double p_r, double sigma) {
    WindSpec w{p_r, sigma, p_r > 0.0 ? sigma / p_r : 0.0, false};
    w.validate();
    return w;
}

WindSpec WindSpec::proportional(double p_r, double cv) {
    WindSpec w{p_r, cv * p_r, cv, true};
    w.validate();
    return w;
}

void WindSpec::validate() const {
    require(std::isfinite(p_r) && p_r >= 0.0, "wind: p_r must be >= 0");
    require(std::isfinite(sigma) && sigma >= 0.0, "wind: sigma must be >= 0");
    require(std::isfinite(cv) && cv >= 0.0, "wind: cv must be >= 0");
    if (correlated) {
        require(std::abs(sigma - cv * p_r) <= 1e-12 * std::max(1.0, sigma),
                "wind: correlated model requires sigma = cv * p_r");
    }
}

double expected_welfare(double p_r, double p_t, double sigma, const WelfareCurve& curve,
                        const Quadrature& quad) {
    require(sigma >= 0.0, "expected_welfare: sigma must be >= 0");
    const double mean = p_r + p_t;
    if (sigma == 0.0) return curve(mean);
    return quad.expect_pwl([&](double m) { return curve(m); }, curve.knots(), mean, sigma);
}

double optimal_pt_given_wind(double p_r, double sigma, const WelfareCurve& curve,
                             const Quadrature& quad, double k_t) {
    require(k_t >= 0.0, "optimal_pt_given_wind: k_t must be >= 0");
    const double hi = curve.n() + 6.0 * sigma;
    const auto objective = [&](double p_t) {
        return k_t * p_t + expected_welfare(p_r, p_t, sigma, curve, quad);
    };
    return golden_section_min(objective, 0.0, hi, kPtTolerance).x;
}

double optimal_cost_F(double p_r, double sigma, const WelfareCurve& curve, const Quadrature& quad) {
    const double p_t = optimal_pt_given_wind(p_r, sigma, curve, quad);
    return expected_welfare(p_r, p_t, sigma, curve, quad);
}

double score_function(double p_v, double p_r, double cv) {
    require(p_r > 0.0, "score_function: p_r must be positive");
    require(cv > 0.0, "score_function: cv must be positive");
    const double spread = cv * p_r;
    return (p_v * (p_v - p_r) / (spread * spread) - 1.0) / p_r;
}

}  // namespace pdlc
