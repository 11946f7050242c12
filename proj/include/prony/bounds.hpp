#pragma once

#include <cmath>
#include <optional>

#include "prony/hankel.hpp"
#include "prony/signal.hpp"

namespace prony {

// Certificates underflow long before this dimension; refuse instead of
// returning denormal garbage.
inline constexpr std::size_t kMaxBoundDim = 10;
// Below this value a cluster bound is reported as an exact zero.
inline constexpr double kBoundUnderflow = 1e-300;

namespace detail {

inline double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

// Running product with a first-order error term carried along (fma based).
struct CompensatedProduct {
    double value = 1.0;
    double err = 0.0;

    void multiply(double f) {
        const double p = value * f;
        err = std::fma(value, f, -p) + err * f;
        value = p;
    }
    double result() const { return value + err; }
};

} // namespace detail

// Euclidean bound on the gradient of an order-l minor determinant, as a
// function of the moments over the box |nu_k| <= d + 1:
// sqrt(2l-1) * l^2 * l! * (d+1)^(l-1).
inline double zeta(std::size_t d, std::size_t l) {
    if (l < 1 || l > d)
        throw shape_error("zeta: order out of range");
    if (d > kMaxBoundDim)
        throw shape_error("zeta: dimension too large for a meaningful certificate");
    return std::sqrt(2.0 * static_cast<double>(l) - 1.0)
         * static_cast<double>(l * l)
         * detail::factorial(l)
         * std::pow(static_cast<double>(d + 1), static_cast<double>(l - 1));
}

// A computable lower bound on the distance (in the first 2d-1 moments,
// Euclidean norm) from a moment vector to every signal with at most l-1
// nodes: theta = min(1, delta / zeta). Valid whenever the moment vector lies
// in the box |nu_k| <= d and the competitor is unrestricted.
struct BoundCertificate {
    std::size_t d = 0;
    std::size_t l = 0;
    double delta = 0.0;   // largest |l-minor| of the moment Hankel matrix
    double zeta = 0.0;
    double theta = 0.0;
    bool restricted = false;  // bound asserted only on the minor's moments
    std::optional<MinorReport> minor;
    double box_radius = 0.0;  // competitor moments assumed inside |nu_k| <= box_radius
};

// Certificate straight from a measured (possibly noisy) moment vector.
inline BoundCertificate theta_from_moments(const MomentVector& m, std::size_t d,
                                           std::size_t l) {
    BoundCertificate c;
    c.d = d;
    c.l = l;
    c.zeta = zeta(d, l);
    HankelMatrix h = build_hankel(m, d);
    c.minor = largest_minor(h, l);
    c.delta = c.minor->delta;
    c.theta = std::min(1.0, c.delta / c.zeta);
    c.box_radius = static_cast<double>(d + 1);
    return c;
}

inline BoundCertificate theta_bound(const NormalizedSignal& f, std::size_t l) {
    const std::size_t d = f.get().size();
    if (d < 1)
        throw shape_error("theta_bound: empty signal");
    return theta_from_moments(moments(f.get(), 2 * d - 1), d, l);
}

inline BoundCertificate theta_bound(const Signal& f, std::size_t l) {
    return theta_bound(NormalizedSignal(f), l);
}

// Guaranteed lower bound on the full Hankel determinant of any
// (eta, gamma)-regular signal in the unit box:
// prod_{i=1}^{d-1} (i!)^2 * eta^(d(d-1)) * gamma^d.
inline double regular_delta_lower_bound(std::size_t d, const RegularityParams& p) {
    if (d < 1 || d > kMaxBoundDim)
        throw shape_error("regular_delta_lower_bound: dimension out of range");
    if (!p.valid_for(d))
        throw shape_error("regular_delta_lower_bound: invalid regularity parameters");
    detail::CompensatedProduct prod;
    for (std::size_t i = 1; i + 1 <= d; ++i) {
        const double f = detail::factorial(i);
        prod.multiply(f);
        prod.multiply(f);
    }
    prod.multiply(std::pow(p.eta, static_cast<double>(d * (d - 1))));
    prod.multiply(std::pow(p.gamma, static_cast<double>(d)));
    return prod.result();
}

// Parametric distance bound for (eta, gamma)-regular signals, every
// competitor having fewer than d nodes.
inline double regular_theta(std::size_t d, const RegularityParams& p) {
    return std::min(1.0, regular_delta_lower_bound(d, p) / zeta(d, d));
}

// Distance bound for clusters: an (eta, gamma)-regular signal downscaled by
// h keeps at least theta_h = min(h^(2d-2), h^(2d-2) * delta_bound / zeta)
// of moment distance to every signal with fewer nodes.
struct ClusterCertificate {
    BoundCertificate base;  // parametric certificate of the pre-scaling signal
    double h = 0.0;
    double theta_h = 0.0;
    bool underflow = false;
};

inline ClusterCertificate cluster_theta(std::size_t d, const RegularityParams& p) {
    if (!p.h)
        throw bad_scale("cluster_theta: missing cluster scale h");
    if (!(*p.h > 0.0) || *p.h > 1.0)
        throw bad_scale("cluster_theta: h must be in (0, 1]");
    ClusterCertificate c;
    c.h = *p.h;
    c.base.d = d;
    c.base.l = d;
    c.base.delta = regular_delta_lower_bound(d, p);
    c.base.zeta = zeta(d, d);
    c.base.theta = std::min(1.0, c.base.delta / c.base.zeta);
    c.base.box_radius = static_cast<double>(d + 1);
    const double hp = std::pow(c.h, 2.0 * static_cast<double>(d) - 2.0);
    c.theta_h = std::min(hp, hp * (c.base.delta / c.base.zeta));
    if (c.theta_h < kBoundUnderflow) {
        c.theta_h = 0.0;
        c.underflow = true;
    }
    return c;
}

} // namespace prony
