#include "pdlc/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>

#include "pdlc/errors.hpp"

namespace pdlc {

namespace {

// Eigenvalues of the probabilists' Hermite Jacobi matrix (zero diagonal,
// off-diagonal sqrt(k)) below x, by the Sturm sequence of its LDL^T pivots.
int count_below(double x, int n) {
    int count = 0;
    double d = -x;
    if (d < 0.0) ++count;
    for (int k = 1; k < n; ++k) {
        const double pivot = d == 0.0 ? 1e-300 : d;
        d = -x - k / pivot;
        if (d < 0.0) ++count;
    }
    return count;
}

// Christoffel weight 1 / sum_k q_k(x)^2 with q_k the orthonormal polynomials,
// rescaled on the way so that outer nodes do not overflow.
double christoffel_weight(double x, int n) {
    constexpr double kBig = 1e150;
    double q_prev = 0.0;
    double q = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;  // of sum
    for (int k = 1; k < n; ++k) {
        const double next = (x * q - std::sqrt(k - 1.0) * q_prev) / std::sqrt(static_cast<double>(k));
        q_prev = q;
        q = next;
        sum += q * q;
        if (std::abs(q) > kBig) {
            q /= kBig;
            q_prev /= kBig;
            sum /= kBig * kBig;
            log_scale += 2.0 * std::log(kBig);
        }
    }
    return std::exp(-(std::log(sum) + log_scale));
}

}  // namespace

Quadrature::Quadrature(int nodes, Scheme scheme) : scheme_(scheme) {
    detail::require(nodes >= 8, "Quadrature: at least 8 nodes required");
    const int n = nodes;
    // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix. Each is
    // isolated by bisection on the Sturm count; all lie within 2 sqrt(n).
    const double bound = 2.0 * std::sqrt(static_cast<double>(n)) + 1.0;
    nodes_.resize(static_cast<std::size_t>(n));
    weights_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double lo = -bound;
        double hi = bound;
        while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo))) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (count_below(mid, n) > i) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        nodes_[static_cast<std::size_t>(i)] = 0.5 * (lo + hi);
    }
    // Symmetrise and weigh.
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const auto mirror = static_cast<std::size_t>(n - 1 - i);
        if (i < n / 2) {
            const double x = 0.5 * (nodes_[mirror] - nodes_[k]);
            nodes_[k] = -x;
            nodes_[mirror] = x;
        } else if (2 * i + 1 == n) {
            nodes_[k] = 0.0;
        }
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        weights_[static_cast<std::size_t>(i)] = christoffel_weight(nodes_[static_cast<std::size_t>(i)], n);
        total += weights_[static_cast<std::size_t>(i)];
    }
    for (double& w : weights_) w /= total;
}

MinimumResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double tol) {
    detail::require(hi >= lo, "golden_section_min: empty interval");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        // Ties move right-to-left so that plateaus resolve towards their left end.
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    MinimumResult best{0.5 * (a + b), f(0.5 * (a + b))};
    for (double x : {lo, hi}) {
        const double v = f(x);
        if (v < best.value) best = {x, v};
    }

    // Walk left while the value stays on the plateau.
    const double level = best.value + 1e-12 * std::max(1.0, std::abs(best.value));
    if (f(lo) <= level) return {lo, f(lo)};
    double left = lo;
    double right = best.x;
    while (right - left > tol) {
        const double mid = 0.5 * (left + right);
        if (f(mid) <= level) {
            right = mid;
        } else {
            left = mid;
        }
    }
    return {right, f(right)};
}

}  // namespace pdlc

namespace pdlc {

namespace {

constexpr int kMaxPower = 4;  // cubic q times linear g
constexpr int kMaxDepth = 30;
constexpr double kReach = 40.0;

double normal_pdf(double z) {
    return std::isinf(z) ? 0.0 : std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// P(a < Z < b) without cancellation in either tail.
double normal_mass(double a, double b) {
    if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
    return 1.0 - 0.5 * (std::erfc(b / std::numbers::sqrt2) + std::erfc(-a / std::numbers::sqrt2));
}

// M[k] = int_a^b z^k phi(z) dz, via M_k = [-z^{k-1} phi]_a^b + (k-1) M_{k-2}.
std::array<double, kMaxPower + 1> partial_moments(double a, double b) {
    std::array<double, kMaxPower + 1> m{};
    const double pa = normal_pdf(a);
    const double pb = normal_pdf(b);
    const auto edge = [&](int power) {
        const double ta = pa == 0.0 ? 0.0 : std::pow(a, power) * pa;
        const double tb = pb == 0.0 ? 0.0 : std::pow(b, power) * pb;
        return ta - tb;
    };
    m[0] = normal_mass(a, b);
    m[1] = edge(0);
    for (int k = 2; k <= kMaxPower; ++k) m[static_cast<std::size_t>(k)] = edge(k - 1) + (k - 1) * m[static_cast<std::size_t>(k - 2)];
    return m;
}

struct PiecewiseIntegrator {
    const std::function<double(double)>& g;
    double mean;
    double sd;
    std::array<double, kMaxPower> q{};

    double at(double z) const { return g(mean + sd * z); }

    // g(z) = alpha + beta z on [a, b]; returns int (alpha + beta z) q(z) phi(z) dz.
    double piece(double a, double b, double alpha, double beta) const {
        const auto m = partial_moments(a, b);
        double acc = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (q[k] != 0.0) acc += q[k] * (alpha * m[k] + beta * m[k + 1]);
        }
        return acc;
    }

    // Fits a line through the inner thirds and probes the midpoint and both
    // ends (just inside, since g may jump at a knot) before trusting it.
    double interval(double a, double b, int depth) const {
        const double z1 = a + (b - a) / 3.0;
        const double z2 = b - (b - a) / 3.0;
        const double g1 = at(z1);
        const double g2 = at(z2);
        const double beta = (g2 - g1) / (z2 - z1);
        const double alpha = g1 - beta * z1;
        if (depth < kMaxDepth) {
            const double inset = 1e-6 * (b - a);
            const double scale = std::abs(g1) + std::abs(g2) + 1.0;
            for (double zp : {a + inset, 0.5 * (a + b), b - inset}) {
                if (std::abs(at(zp) - (alpha + beta * zp)) > 1e-10 * scale) {
                    const double zm = 0.5 * (a + b);
                    return interval(a, zm, depth + 1) + interval(zm, b, depth + 1);
                }
            }
        }
        return piece(a, b, alpha, beta);
    }
};

}  // namespace

double expect_piecewise_linear(const std::function<double(double)>& g, std::vector<double> knots,
                               double mean, double sd, std::span<const double> poly) {
    detail::require(sd >= 0.0 && std::isfinite(sd), "expect_piecewise_linear: sd must be >= 0");
    detail::require(poly.size() <= static_cast<std::size_t>(kMaxPower),
                    "expect_piecewise_linear: polynomial degree above 3");
    PiecewiseIntegrator it{g, mean, sd};
    if (poly.empty()) {
        it.q[0] = 1.0;
    } else {
        std::copy(poly.begin(), poly.end(), it.q.begin());
    }
    if (sd == 0.0) return g(mean) * it.q[0];

    // Beyond kReach standard deviations the Gaussian mass underflows.
    std::vector<double> z{-kReach, kReach};
    for (double x : knots) {
        const double v = (x - mean) / sd;
        if (std::abs(v) < kReach) z.push_back(v);
    }
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) acc += it.interval(z[i], z[i + 1], 0);
    return acc;
}

}  // namespace pdlc

namespace pdlc {

double Quadrature::expect_pwl(const std::function<double(double)>& g, std::vector<double> knots,
                              double mean, double sd, std::span<const double> poly) const {
    if (scheme_ == Scheme::Exact) return expect_piecewise_linear(g, std::move(knots), mean, sd, poly);
    if (sd == 0.0) return g(mean) * (poly.empty() ? 1.0 : poly[0]);
    return expect([&](double z) {
        double q = poly.empty() ? 1.0 : 0.0;
        double zk = 1.0;
        for (double c : poly) {
            q += c * zk;
            zk *= z;
        }
        return g(mean + sd * z) * q;
    });
}

}  // namespace pdlc
