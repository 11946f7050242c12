#pragma once

#include <Eigen/Dense>
#include <array>
#include <cassert>
#include <cmath>
#include <optional>
#include <vector>

#include "prony/inversion.hpp"
#include "prony/signal.hpp"

namespace prony {

// Entries of a sampled amplitude vector at or below this magnitude make the
// sample leave the admissible set (signals need nonzero amplitudes).
inline constexpr double kSampleZeroTol = 1e-12;

using DistanceMatrix = Eigen::MatrixXd;

namespace detail {

inline void require_distinct(const std::vector<double>& x, const char* who) {
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (std::abs(x[i] - x[j]) < kNodeCoincidenceTol)
                throw degenerate_nodes(std::string(who) + ": coincident nodes");
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace detail

// D(i, j) = (x_i - x_j)^2.
inline DistanceMatrix distance_matrix(const std::vector<double>& x) {
    if (x.empty())
        throw shape_error("distance_matrix: empty node vector");
    const auto n = static_cast<Eigen::Index>(x.size());
    DistanceMatrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            d(i, j) = g * g;
        }
#ifndef NDEBUG
    {
        // rank-3 factorization: D = w 1^T + 1 w^T - 2 x x^T, w_i = x_i^2
        const Eigen::VectorXd xv = detail::to_eigen(x);
        const Eigen::VectorXd w = xv.cwiseProduct(xv);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        const Eigen::MatrixXd alt =
            w * ones.transpose() + ones * w.transpose() - 2.0 * xv * xv.transpose();
        const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
        assert((d - alt).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
#endif
    return d;
}

// Node vector shifted to zero mean, with ||centered||^4 cached.
struct CenteredNodes {
    double mean = 0.0;
    Eigen::VectorXd centered;
    double norm4 = 0.0;
};

inline CenteredNodes center_nodes(const std::vector<double>& x) {
    if (x.empty())
        throw shape_error("center_nodes: empty node vector");
    CenteredNodes cn;
    const Eigen::VectorXd xv = detail::to_eigen(x);
    cn.mean = xv.mean();
    cn.centered = xv.array() - cn.mean;
    const double n2 = cn.centered.squaredNorm();
    cn.norm4 = n2 * n2;
    return cn;
}

// a^T D(x) a computed as 2 * sum_{i<j} a_i a_j (x_i - x_j)^2, which halves the
// rounding error relative to the matrix triple product.
inline double quad_form(const std::vector<double>& a, const std::vector<double>& x) {
    if (a.size() != x.size())
        throw shape_error("quad_form: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double g = x[i] - x[j];
            s += a[i] * a[j] * g * g;
        }
    return 2.0 * s;
}

// Matrix triple-product route, kept as an independent cross-check of quad_form.
inline double quad_form_matrix(const std::vector<double>& a, const std::vector<double>& x) {
    if (a.size() != x.size())
        throw shape_error("quad_form_matrix: length mismatch");
    const Eigen::VectorXd av = detail::to_eigen(a);
    return av.dot(distance_matrix(x) * av);
}

// Both routes to the second-moment gap m_2(single-node fit) - m_2(F):
// first through the explicit fit, then through -a^T D a / (2 sum a).
inline std::pair<double, double> m2_gap_routes(const Signal& f) {
    if (f.size() < 2)
        throw shape_error("m2_gap: needs at least two nodes");
    const MomentVector m = moments(f, 3);
    if (m[0] == 0.0)
        throw zero_mass("m2_gap: zero total mass");
    const Signal tilde = fit_single_node(m);
    const double via_fit = moments(tilde, 3)[2] - m[2];
    const double via_form = -quad_form(f.amplitudes, f.nodes) / (2.0 * m[0]);
    return {via_fit, via_form};
}

inline double m2_gap(const Signal& f) {
    const auto [via_fit, via_form] = m2_gap_routes(f);
#ifndef NDEBUG
    {
        const double scale = std::max({1e-30, std::abs(via_fit), std::abs(via_form)});
        assert(std::abs(via_fit - via_form) <= 1e-8 * scale || std::abs(via_fit - via_form) <= 1e-14);
    }
#endif
    (void)via_fit;
    return via_form;
}

// The two coefficients along the centered node direction for which the
// mean-normalized amplitude vector annihilates the quadratic form.
struct AlphaRoots {
    double alpha1 = 0.0;  // larger root
    double alpha2 = 0.0;  // smaller root
    double c1 = 0.0;      // +sqrt(discriminant)
    double c2 = 0.0;      // -sqrt(discriminant)
};

namespace detail {

struct BranchQuadratic {
    double norm4 = 0.0;      // leading coefficient
    double cross = 0.0;      // centered^T D 1 / d
    double pair_sum = 0.0;   // sum_{i<j} (x_i - x_j)^2 / d^2
};

inline BranchQuadratic branch_quadratic(const std::vector<double>& x) {
    const auto d = static_cast<double>(x.size());
    const DistanceMatrix dm = distance_matrix(x);
    const CenteredNodes cn = center_nodes(x);
    BranchQuadratic q;
    q.norm4 = cn.norm4;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dm.rows());
    q.cross = cn.centered.dot(dm * ones) / d;
    q.pair_sum = 0.5 * dm.sum() / (d * d);
    return q;
}

// Roots of norm4 * t^2 - cross * t - constant = 0, returned (larger, smaller).
inline std::optional<AlphaRoots> solve_branch(const BranchQuadratic& q, double constant) {
    const double disc = q.cross * q.cross + 4.0 * q.norm4 * constant;
    if (disc < 0.0) return std::nullopt;
    const double sd = std::sqrt(disc);
    double r1, r2;
    if (q.cross >= 0.0) {
        const double big = q.cross + sd;
        if (big == 0.0) {
            r1 = r2 = 0.0;
        } else {
            r1 = big / (2.0 * q.norm4);
            r2 = -constant / (q.norm4 * r1);
        }
    } else {
        const double big = q.cross - sd;
        r2 = big / (2.0 * q.norm4);
        r1 = -constant / (q.norm4 * r2);
    }
    AlphaRoots out;
    out.alpha1 = std::max(r1, r2);
    out.alpha2 = std::min(r1, r2);
    out.c1 = sd;
    out.c2 = -sd;
    return out;
}

} // namespace detail

// Branch coefficients for a zero with no component outside span(1, centered):
// (1/d) 1 + alpha_k * centered is a zero of the quadratic form for both roots.
// The discriminant is a sum of nonnegative terms, so both roots are real.
inline AlphaRoots alpha_roots(const std::vector<double>& x) {
    if (x.size() < 2)
        throw degenerate_nodes("alpha_roots: needs at least two nodes");
    detail::require_distinct(x, "alpha_roots");
    const auto q = detail::branch_quadratic(x);
    return *detail::solve_branch(q, q.pair_sum);
}

// Branch coefficients with a prescribed component u orthogonal to 1 and to the
// centered nodes. The component shifts the constant term of the branch
// quadratic by sum_i u_i * centered_i^2; for strongly negative shifts no real
// coefficient exists and nullopt is returned. With u = 0 this reduces to
// alpha_roots(x). For both roots, (1/d) 1 + alpha_k * centered + u annihilates
// the quadratic form exactly.
inline std::optional<AlphaRoots> alpha_roots(const std::vector<double>& x,
                                             const Eigen::VectorXd& u) {
    if (x.size() < 2)
        throw degenerate_nodes("alpha_roots: needs at least two nodes");
    if (u.size() != static_cast<Eigen::Index>(x.size()))
        throw shape_error("alpha_roots: component length mismatch");
    detail::require_distinct(x, "alpha_roots");
    const CenteredNodes cn = center_nodes(x);
    const double ucheck = std::abs(u.sum()) + std::abs(u.dot(cn.centered));
    if (ucheck > 1e-8 * (1.0 + u.norm()) * (1.0 + cn.centered.norm()))
        throw shape_error("alpha_roots: component not orthogonal to span(1, centered)");
    const auto q = detail::branch_quadratic(x);
    const double shift = u.dot(cn.centered.cwiseProduct(cn.centered));
    return detail::solve_branch(q, q.pair_sum + shift);
}

// Deterministic orthonormal basis of the (d-2)-dimensional orthogonal
// complement of span(1, centered nodes), via two-pass Gram-Schmidt over the
// standard basis vectors in index order.
inline Eigen::MatrixXd complement_basis(const std::vector<double>& x) {
    const auto d = static_cast<Eigen::Index>(x.size());
    if (d < 2)
        throw degenerate_nodes("complement_basis: needs at least two nodes");
    detail::require_distinct(x, "complement_basis");
    const CenteredNodes cn = center_nodes(x);

    Eigen::MatrixXd q(d, d);
    Eigen::Index count = 0;
    q.col(count++) = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    q.col(count++) = cn.centered.normalized();
    for (Eigen::Index i = 0; i < d && count < d; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(d, i);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < count; ++k)
                v -= q.col(k).dot(v) * q.col(k);
        if (v.norm() > 1e-10) {
            q.col(count++) = v.normalized();
        }
    }
    if (count < d)
        throw shape_error("complement_basis: basis construction failed");
    return q.rightCols(d - 2);
}

// Writes a (with nonzero total mass) as scale * ((1/d) 1 + along * centered + u)
// with u orthogonal to 1 and to the centered nodes; scale equals sum(a).
struct AmplitudeDecomposition {
    double scale = 0.0;
    double along_centered = 0.0;
    Eigen::VectorXd complement;
};

inline AmplitudeDecomposition decompose_amplitudes(const std::vector<double>& a,
                                                   const std::vector<double>& x) {
    if (a.size() != x.size())
        throw shape_error("decompose_amplitudes: length mismatch");
    if (x.size() < 2)
        throw degenerate_nodes("decompose_amplitudes: needs at least two nodes");
    const CenteredNodes cn = center_nodes(x);
    AmplitudeDecomposition out;
    const Eigen::VectorXd av = detail::to_eigen(a);
    out.scale = av.sum();
    if (out.scale == 0.0)
        throw zero_mass("decompose_amplitudes: zero total mass");
    const Eigen::VectorXd unit = av / out.scale;
    const double n2 = cn.centered.squaredNorm();
    out.along_centered = unit.dot(cn.centered) / n2;
    out.complement = unit
        - Eigen::VectorXd::Constant(av.size(), 1.0 / static_cast<double>(av.size()))
        - out.along_centered * cn.centered;
    return out;
}

enum class BranchRejection { none, zero_amplitude, no_real_branch };

struct BranchSample {
    std::optional<Signal> signal;
    BranchRejection rejection = BranchRejection::none;
};

// Samples an amplitude vector lambda * ((1/d) 1 + alpha_branch * centered + u)
// annihilating the quadratic form, with u given by coefficients in the fixed
// complement basis. Samples whose amplitude vector has a zero entry leave the
// admissible signal set and are rejected rather than perturbed.
inline BranchSample sample_branch(const std::vector<double>& x, int branch, double lambda,
                                  const std::vector<double>& u_coeffs) {
    if (lambda == 0.0)
        throw bad_lambda("sample_branch: lambda must be nonzero");
    if (branch != 1 && branch != 2)
        throw shape_error("sample_branch: branch must be 1 or 2");
    const std::size_t d = x.size();
    if (d < 2)
        throw degenerate_nodes("sample_branch: needs at least two nodes");
    if (u_coeffs.size() != d - 2)
        throw shape_error("sample_branch: expected d-2 complement coefficients");

    const Eigen::MatrixXd basis = complement_basis(x);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < u_coeffs.size(); ++i)
        u += u_coeffs[i] * basis.col(static_cast<Eigen::Index>(i));

    const auto roots = alpha_roots(x, u);
    if (!roots)
        return BranchSample{std::nullopt, BranchRejection::no_real_branch};
    const double alpha = (branch == 1) ? roots->alpha1 : roots->alpha2;

    const CenteredNodes cn = center_nodes(x);
    std::vector<double> a(d);
    for (std::size_t i = 0; i < d; ++i) {
        a[i] = lambda * (1.0 / static_cast<double>(d)
                         + alpha * cn.centered(static_cast<Eigen::Index>(i))
                         + u(static_cast<Eigen::Index>(i)));
        if (std::abs(a[i]) <= kSampleZeroTol)
            return BranchSample{std::nullopt, BranchRejection::zero_amplitude};
    }
    return BranchSample{validate_signal(a, x), BranchRejection::none};
}

enum class SigmaCase { case_i, case_ii, not_member };

// Verdict and witness for "some signal with at most one node matches the
// first three moments". The witness is the zero signal when the total mass
// vanishes, otherwise the explicit single-node fit. moment_gaps always holds
// m_k(F) - m_k(candidate) for k = 0, 1, 2, also for non-members.
struct SigmaCertificate {
    bool member = false;
    SigmaCase case_tag = SigmaCase::not_member;
    std::optional<Signal> witness;
    double quad_value = 0.0;
    std::array<double, 3> moment_gaps{0.0, 0.0, 0.0};
};

// Membership is decided with homogeneous relative tolerances, so the verdict
// is invariant under amplitude rescaling: the zero-mass test is scaled by
// ||a||_1 and the quadratic-form test by ||a||_2^2 * max D.
inline SigmaCertificate sigma_membership(const Signal& f, double tol = 1e-9) {
    if (!(tol > 0.0))
        throw shape_error("sigma_membership: tolerance must be positive");
    SigmaCertificate cert;
    const std::size_t d = f.size();
    if (d == 0)
        return cert;

    const MomentVector m = moments(f, 3);
    if (d >= 2)
        cert.quad_value = quad_form(f.amplitudes, f.nodes);

    if (d < 2) {
        // a single node is never matched by a strictly smaller signal
        cert.moment_gaps = {0.0, 0.0, 0.0};
        return cert;
    }

    double a1norm = 0.0, a2norm = 0.0, xmax = 0.0;
    for (double a : f.amplitudes) {
        a1norm += std::abs(a);
        a2norm += a * a;
    }
    for (double x : f.nodes) xmax = std::max(xmax, std::abs(x));
    const double dmax = (f.nodes.back() - f.nodes.front()) * (f.nodes.back() - f.nodes.front());

    if (std::abs(m[0]) <= tol * a1norm) {
        // zero-mass case: only the zero signal can match, so the first three
        // moments must all vanish
        const double s = tol * a1norm * std::max(1.0, xmax) * std::max(1.0, xmax);
        cert.moment_gaps = {m[0], m[1], m[2]};
        if (std::abs(m[1]) <= s && std::abs(m[2]) <= s) {
            cert.member = true;
            cert.case_tag = SigmaCase::case_i;
            cert.witness = Signal{};
        }
        return cert;
    }

    const Signal candidate = fit_single_node(m);
    const MomentVector cm = moments(candidate, 3);
    cert.moment_gaps = {m[0] - cm[0], m[1] - cm[1], m[2] - cm[2]};
    if (std::abs(cert.quad_value) <= tol * a2norm * dmax) {
        cert.member = true;
        cert.case_tag = SigmaCase::case_ii;
        cert.witness = candidate;
    }
    return cert;
}

} // namespace prony
