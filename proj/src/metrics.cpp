#include "pdlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Objective>
int scan_convex(int n, Objective&& objective) {
    // Convex in m: walk up until the first strict increase.
    int best = 1;
    double best_value = objective(1);
    for (int m = 2; m <= n; ++m) {
        const double v = objective(m);
        if (v < best_value) {
            best = m;
            best_value = v;
        } else if (v > best_value) {
            break;
        }
    }
    return best;
}

}  // namespace

void WelfareConfig::validate() const {
    require(std::isfinite(g_quad) && g_quad >= 0.0, "welfare: g_quad must be >= 0");
    require(std::isfinite(g_lin) && g_lin >= 0.0, "welfare: g_lin must be >= 0");
    require(g_quad > 0.0 || g_lin > 0.0, "welfare: g_quad and g_lin cannot both be zero");
    require(std::isfinite(h_price) && h_price >= 0.0, "welfare: h_price must be >= 0");
    require(std::isfinite(kappa) && kappa > 0.0, "welfare: kappa must be positive");
    require(w_cap > 0.0, "welfare: w_cap must be positive");
}

double energy_metric(const QueueParams& base, int m, EnergyWeights weights) {
    const QueueSolution s = steady_state(base.with_servers(m));
    return weights.excess * s.excess + weights.deficiency * s.deficiency;
}

int optimize_m_energy(const QueueParams& base, EnergyWeights weights) {
    base.with_servers(1).validate();
    return scan_convex(base.n_appliances,
                       [&](int m) { return energy_metric(base, m, weights); });
}

double welfare_metric(const QueueParams& base, int m, const WelfareConfig& cfg) {
    cfg.validate();
    const QueueSolution s = steady_state(base.with_servers(m));
    return cfg.disutility(cfg.kappa * s.w_extra) + cfg.h_price * s.excess;
}

int optimize_m_welfare(const QueueParams& base, const WelfareConfig& cfg) {
    base.with_servers(1).validate();
    return scan_convex(base.n_appliances,
                       [&](int m) { return welfare_metric(base, m, cfg); });
}

WelfareCurve::WelfareCurve(std::vector<double> samples, double w_cap)
    : samples_(std::move(samples)), w_cap_(w_cap) {
    require(!samples_.empty(), "WelfareCurve: no samples");
    double scale = 1.0;
    for (double v : samples_) {
        require(std::isfinite(v), "WelfareCurve: non-finite sample");
        scale = std::max(scale, std::abs(v));
    }
    require(w_cap_ > *std::max_element(samples_.begin(), samples_.end()),
            "WelfareCurve: w_cap must exceed every welfare value on [1, N]");
    for (std::size_t k = 1; k + 1 < samples_.size(); ++k) {
        const double second = samples_[k + 1] - 2.0 * samples_[k] + samples_[k - 1];
        if (second < -1e-9 * scale) {
            std::ostringstream msg;
            msg << "WelfareCurve: samples not convex at m = " << k + 1 << " (second difference "
                << second << ")";
            throw NumericError(msg.str());
        }
    }
    left_slope_ = samples_.size() > 1 ? samples_[1] - samples_[0] : 0.0;
    const std::size_t n = samples_.size();
    right_slope_ = n > 1 ? std::max(0.0, samples_[n - 1] - samples_[n - 2]) : 0.0;
    cap_point_ = left_slope_ < 0.0 ? 1.0 + (w_cap_ - samples_[0]) / left_slope_ : -kInf;
}

WelfareCurve WelfareCurve::build(const QueueParams& base, const WelfareConfig& cfg) {
    cfg.validate();
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(base.n_appliances));
    for (int m = 1; m <= base.n_appliances; ++m) samples.push_back(welfare_metric(base, m, cfg));
    return WelfareCurve(std::move(samples), cfg.w_cap);
}

double WelfareCurve::operator()(double m) const {
    const auto n = static_cast<double>(samples_.size());
    if (m >= n) return samples_.back() + right_slope_ * (m - n);
    if (m >= 1.0) {
        const double fl = std::floor(m);
        const auto k = static_cast<std::size_t>(fl) - 1;
        const double t = m - fl;
        return samples_[k] + t * (samples_[k + 1] - samples_[k]);
    }
    return std::min(w_cap_, samples_[0] + left_slope_ * (m - 1.0));
}

double WelfareCurve::right_slope(double m) const {
    const auto n = static_cast<double>(samples_.size());
    if (m >= n) return right_slope_;
    if (m >= 1.0) {
        const auto k = static_cast<std::size_t>(std::floor(m)) - 1;
        return samples_[k + 1] - samples_[k];
    }
    return m < cap_point_ ? 0.0 : left_slope_;
}

double WelfareCurve::left_slope(double m) const {
    const auto n = static_cast<double>(samples_.size());
    if (m > n) return right_slope_;
    if (m > 1.0) {
        const auto k = static_cast<std::size_t>(std::ceil(m)) - 1;
        return samples_[k] - samples_[k - 1];
    }
    return m <= cap_point_ ? 0.0 : left_slope_;
}

double WelfareCurve::next_breakpoint(double m) const {
    if (m < cap_point_) return cap_point_;
    const auto n = static_cast<double>(samples_.size());
    if (m < 1.0) return 1.0;
    if (m >= n) return kInf;
    return std::floor(m) + 1.0;
}

std::vector<double> WelfareCurve::knots() const {
    std::vector<double> k;
    k.reserve(samples_.size() + 1);
    if (std::isfinite(cap_point_)) k.push_back(cap_point_);
    for (int m = 1; m <= n(); ++m) k.push_back(m);
    return k;
}

double WelfareCurve::argmin() const {
    const auto it = std::min_element(samples_.begin(), samples_.end());
    return static_cast<double>(std::distance(samples_.begin(), it) + 1);
}

}  // namespace pdlc
