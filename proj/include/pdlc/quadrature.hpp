#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pdlc {

/// E[g(mean + sd Z) q(Z)], Z ~ N(0, 1), q(z) = sum_k poly[k] z^k (degree <= 3),
/// for g linear between consecutive `knots` (jumps allowed at knots) and
/// linear beyond the outermost ones. Computed from Gaussian partial moments,
/// so the result is exact up to rounding. Intervals on which g turns out not
/// to be linear are bisected, which absorbs a few unlisted kinks.
double expect_piecewise_linear(const std::function<double(double)>& g, std::vector<double> knots,
                               double mean, double sd, std::span<const double> poly = {});

/// Gaussian expectations. The node table is a Gauss-Hermite rule in
/// probabilists' form, E[f(Z)] ~= sum_i weight_i f(node_i), exact for
/// polynomials of degree < 2n. Piecewise-linear integrands (welfare curves,
/// recourse costs) go through expect_pwl, which by default integrates them
/// exactly between their kinks; Scheme::GaussHermite applies the rule instead.
class Quadrature {
public:
    enum class Scheme : std::uint8_t { Exact, GaussHermite };

    explicit Quadrature(int nodes = 64, Scheme scheme = Scheme::Exact);

    int size() const { return static_cast<int>(nodes_.size()); }
    Scheme scheme() const { return scheme_; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    template <class F>
    double expect(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
        return acc;
    }

    /// E[f(mean + sd * Z)] by the node table.
    template <class F>
    double expect_normal(double mean, double sd, F&& f) const {
        return expect([&](double z) { return f(mean + sd * z); });
    }

    /// E[g(mean + sd Z) q(Z)] for g piecewise linear with kinks among `knots`.
    double expect_pwl(const std::function<double(double)>& g, std::vector<double> knots, double mean,
                      double sd, std::span<const double> poly = {}) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    Scheme scheme_;
};

struct MinimumResult {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for a unimodal function on [lo, hi] down to an
/// interval of width `tol`. When the minimum value is attained on a plateau,
/// the returned point is the left end of that plateau (to within `tol`).
MinimumResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double tol);

}  // namespace pdlc
