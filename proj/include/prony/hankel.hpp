#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cassert>
#include <vector>

#include "prony/signal.hpp"

namespace prony {

// Exhaustive minor enumeration is only intended for small matrices.
inline constexpr std::size_t kMaxMinorDim = 10;

// d x d moment Hankel matrix, entry (i, j) = m_{i+j}. Constant anti-diagonals
// hold by construction: the matrix is only ever built from a moment slice.
class HankelMatrix {
public:
    HankelMatrix(const MomentVector& m, std::size_t d) {
        if (d < 1)
            throw shape_error("HankelMatrix: size must be positive");
        if (m.size() < 2 * d - 1)
            throw shape_error("HankelMatrix: needs at least 2d-1 moments");
        mat_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                mat_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i + j];
    }

    std::size_t size() const { return static_cast<std::size_t>(mat_.rows()); }
    double entry(std::size_t i, std::size_t j) const {
        return mat_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::MatrixXd& matrix() const { return mat_; }

private:
    Eigen::MatrixXd mat_;
};

inline HankelMatrix build_hankel(const MomentVector& m, std::size_t d) {
    return HankelMatrix(m, d);
}

// k x d matrix with entry (r, c) = x_c^r.
inline Eigen::MatrixXd vandermonde(const std::vector<double>& x, std::size_t rows) {
    if (rows < 1 || x.empty())
        throw shape_error("vandermonde: needs rows >= 1 and a nonempty node vector");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(x.size()));
    for (std::size_t c = 0; c < x.size(); ++c) {
        double p = 1.0;
        for (std::size_t r = 0; r < rows; ++r) {
            v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p;
            p *= x[c];
        }
    }
    return v;
}

// V * diag(a) * V^T with V the first d Vandermonde rows on the signal's nodes.
// Alternative route to hankel_from_signal, kept public for cross-checking.
inline Eigen::MatrixXd hankel_via_factorization(const Signal& g, std::size_t d) {
    if (d < 1)
        throw shape_error("hankel_via_factorization: size must be positive");
    if (g.size() > d)
        throw shape_error("hankel_via_factorization: signal has more nodes than d");
    if (g.size() == 0)
        return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Eigen::MatrixXd v = vandermonde(g.nodes, d);
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
        g.amplitudes.data(), static_cast<Eigen::Index>(g.amplitudes.size()));
    return v * a.asDiagonal() * v.transpose();
}

// Hankel matrix of the signal's first 2d-1 moments.
inline HankelMatrix hankel_from_signal(const Signal& g, std::size_t d) {
    if (d < 1)
        throw shape_error("hankel_from_signal: size must be positive");
    if (g.size() > d)
        throw shape_error("hankel_from_signal: signal has more nodes than d");
    HankelMatrix h(moments(g, 2 * d - 1), d);
#ifndef NDEBUG
    {
        const Eigen::MatrixXd alt = hankel_via_factorization(g, d);
        const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
        assert((h.matrix() - alt).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
#endif
    return h;
}

// Largest |l x l minor| of a Hankel matrix, with the attaining index sets.
struct MinorReport {
    int order = 0;
    double value = 0.0;            // signed determinant of the attaining minor
    std::vector<int> row_indices;  // sorted
    std::vector<int> col_indices;  // sorted
    double delta = 0.0;            // max over all l-minors of |det|
};

namespace detail {

// Advances a k-combination of {0..n-1} in lexicographic order.
inline bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Closed forms for orders <= 3, LU with partial pivoting above.
inline double submatrix_determinant(const Eigen::MatrixXd& m,
                                    const std::vector<int>& rows,
                                    const std::vector<int>& cols) {
    const int l = static_cast<int>(rows.size());
    auto e = [&](int i, int j) { return m(rows[static_cast<std::size_t>(i)],
                                          cols[static_cast<std::size_t>(j)]); };
    switch (l) {
        case 1:
            return e(0, 0);
        case 2:
            return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
        case 3:
            return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                 - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                 + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        default: {
            Eigen::MatrixXd sub(l, l);
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < l; ++j)
                    sub(i, j) = e(i, j);
            return sub.determinant();
        }
    }
}

} // namespace detail

// Enumerates all C(d,l)^2 minors of order l. Ties in |det| are broken by
// lexicographic order of (row set, column set), so the result is deterministic.
inline MinorReport largest_minor(const HankelMatrix& h, std::size_t l) {
    const std::size_t d = h.size();
    if (l < 1 || l > d)
        throw shape_error("largest_minor: order out of range");
    if (d > kMaxMinorDim)
        throw shape_error("largest_minor: matrix too large for exhaustive enumeration");

    MinorReport best;
    best.order = static_cast<int>(l);
    best.delta = -1.0;

    std::vector<int> rows(l);
    std::iota(rows.begin(), rows.end(), 0);
    do {
        std::vector<int> cols(l);
        std::iota(cols.begin(), cols.end(), 0);
        do {
            const double det = detail::submatrix_determinant(h.matrix(), rows, cols);
            if (std::abs(det) > best.delta) {
                best.delta = std::abs(det);
                best.value = det;
                best.row_indices = rows;
                best.col_indices = cols;
            }
        } while (detail::next_combination(cols, static_cast<int>(d)));
    } while (detail::next_combination(rows, static_cast<int>(d)));
    return best;
}

// Number of singular values above tolerance * sigma_max; 0 for the zero matrix.
inline int numerical_rank(const HankelMatrix& h, double tolerance) {
    if (!(tolerance > 0.0))
        throw shape_error("numerical_rank: tolerance must be positive");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.matrix());
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tolerance * sv(0)) ++r;
    return r;
}

} // namespace prony
