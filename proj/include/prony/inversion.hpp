#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "prony/hankel.hpp"
#include "prony/signal.hpp"

namespace prony {

// Roots whose imaginary part exceeds this relative threshold are rejected.
inline constexpr double kImagTol = 1e-8;
// Fitted amplitudes at or below this magnitude are dropped and the fewer-node
// system is re-fit.
inline constexpr double kAmplitudePruneTol = 1e-10;

struct PronyProblem {
    MomentVector moments;          // exactly 2 * target_nodes entries
    std::size_t target_nodes = 0;  // l
};

struct PronySolution {
    Signal signal;           // at most target_nodes nodes
    double residual = 0.0;   // max |m_k(signal) - m_k| over the 2l inputs
};

// Unique single-node signal matching m_0 and m_1: amplitude m_0, node m_1/m_0.
inline Signal fit_single_node(const MomentVector& m) {
    if (m.size() < 2)
        throw shape_error("fit_single_node: needs at least two moments");
    if (m[0] == 0.0)
        throw zero_mass("fit_single_node: m_0 is zero");
    return validate_signal({m[0]}, {m[1] / m[0]});
}

namespace detail {

inline double max_abs(const MomentVector& m) {
    double v = 0.0;
    for (double x : m) v = std::max(v, std::abs(x));
    return v;
}

// Least-squares amplitudes for fixed nodes against the full moment vector,
// pruning negligible amplitudes and re-fitting until stable.
inline void fit_amplitudes(std::vector<double>& nodes, std::vector<double>& amps,
                           const MomentVector& m) {
    while (!nodes.empty()) {
        const Eigen::MatrixXd v = vandermonde(nodes, m.size());
        const Eigen::VectorXd rhs =
            Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
        const Eigen::VectorXd a = v.colPivHouseholderQr().solve(rhs);
        amps.assign(a.data(), a.data() + a.size());

        std::vector<double> kept_nodes, kept_amps;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            if (std::abs(amps[i]) > kAmplitudePruneTol) {
                kept_nodes.push_back(nodes[i]);
                kept_amps.push_back(amps[i]);
            }
        }
        if (kept_nodes.size() == nodes.size()) {
            amps = kept_amps;
            return;
        }
        nodes = kept_nodes;
        amps = kept_amps;
    }
}

} // namespace detail

// Classical Prony inversion of 2l moments: solve the l x l Hankel system for
// the node polynomial, read its roots off the companion matrix, then solve
// the Vandermonde least-squares system for the amplitudes. When the Hankel
// block is rank deficient the minimal-node representation is returned.
inline PronySolution prony_solve(const PronyProblem& p) {
    const std::size_t l = p.target_nodes;
    if (l < 1)
        throw shape_error("prony_solve: target_nodes must be >= 1");
    if (p.moments.size() != 2 * l)
        throw shape_error("prony_solve: moment vector must have exactly 2l entries");
    const MomentVector& m = p.moments;

    const bool all_zero = std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; });
    if (all_zero)
        return PronySolution{Signal{}, 0.0};

    Eigen::MatrixXd h(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j)
            h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i + j];

    // Effective node count: numerical rank of the moment Hankel block.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
    const auto& sv = svd.singularValues();
    std::size_t r = 0;
    if (sv(0) > 0.0)
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-13 * sv(0)) ++r;
    if (r == 0)
        return PronySolution{Signal{}, detail::max_abs(m)};

    // Node polynomial z^r - sum_j c_j z^j from the r x r leading block.
    Eigen::MatrixXd hr = h.topLeftCorner(static_cast<Eigen::Index>(r),
                                         static_cast<Eigen::Index>(r));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < r; ++i)
        rhs(static_cast<Eigen::Index>(i)) = m[r + i];
    const Eigen::VectorXd c = hr.colPivHouseholderQr().solve(rhs);

    Eigen::MatrixXd companion =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    for (std::size_t i = 1; i < r; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    companion.col(static_cast<Eigen::Index>(r - 1)) = c;

    Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
    std::vector<double> nodes;
    nodes.reserve(r);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > kImagTol * (1.0 + std::abs(z)))
            throw no_real_solution("prony_solve: complex node polynomial root");
        nodes.push_back(z.real());
    }
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i + 1] - nodes[i] < kNodeCoincidenceTol)
            throw no_real_solution("prony_solve: repeated node polynomial root");

    std::vector<double> amps;
    detail::fit_amplitudes(nodes, amps, m);

    PronySolution sol;
    sol.signal = nodes.empty() ? Signal{} : validate_signal(amps, nodes);
    const MomentVector back = moments(sol.signal, m.size());
    double res = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
        res = std::max(res, std::abs(back[k] - m[k]));
    sol.residual = res;
    return sol;
}

} // namespace prony
