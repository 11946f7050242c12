#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "prony/hankel.hpp"

using namespace prony;

namespace {

// Independent determinant for the minor oracle: recursive cofactor expansion.
double cofactor_det(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    double det = 0.0, sign = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<double>> sub(n - 1, std::vector<double>(n - 1));
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t jj = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == c) continue;
                sub[i - 1][jj++] = m[i][j];
            }
        }
        det += sign * m[0][c] * cofactor_det(sub);
        sign = -sign;
    }
    return det;
}

// Brute-force largest |l-minor| with its own combination loops.
double brute_force_delta(const HankelMatrix& h, std::size_t l) {
    const std::size_t d = h.size();
    std::vector<std::size_t> rows(l), cols(l);
    double best = 0.0;

    const auto combos = [&](std::size_t k) {
        std::vector<std::vector<std::size_t>> all;
        std::vector<std::size_t> c(k);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t pos) {
            if (pos == k) {
                all.push_back(c);
                return;
            }
            for (std::size_t v = start; v < d; ++v) {
                c[pos] = v;
                rec(v + 1, pos + 1);
            }
        };
        rec(0, 0);
        return all;
    };

    for (const auto& r : combos(l))
        for (const auto& cset : combos(l)) {
            std::vector<std::vector<double>> sub(l, std::vector<double>(l));
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = 0; j < l; ++j)
                    sub[i][j] = h.entry(r[i], cset[j]);
            best = std::max(best, std::abs(cofactor_det(sub)));
        }
    return best;
}

} // namespace

TEST_CASE("build_hankel lays out moments along anti-diagonals") {
    const HankelMatrix h = build_hankel({1.0, 0.0, 1.0}, 2);
    REQUIRE(h.entry(0, 0) == 1.0);
    REQUIRE(h.entry(0, 1) == 0.0);
    REQUIRE(h.entry(1, 0) == 0.0);
    REQUIRE(h.entry(1, 1) == 1.0);

    const HankelMatrix g = build_hankel({2.0, 0.0, 2.0}, 2);
    REQUIRE(g.entry(0, 0) == 2.0);
    REQUIRE(g.entry(1, 1) == 2.0);
}

TEST_CASE("build_hankel anti-diagonal invariant on random moments") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        MomentVector m(9);
        for (double& v : m) v = uniform_in(rng, -3.0, 3.0);
        const HankelMatrix h = build_hankel(m, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                REQUIRE(h.entry(i, j) == m[i + j]);
    }
}

TEST_CASE("build_hankel needs 2d-1 moments") {
    REQUIRE_THROWS_AS(build_hankel({1.0, 2.0}, 2), shape_error);
    REQUIRE_THROWS_AS(build_hankel({1.0}, 0), shape_error);
}

TEST_CASE("vandermonde on small node vectors") {
    const Eigen::MatrixXd v = vandermonde({0.0, 1.0}, 3);
    REQUIRE(v(0, 0) == 1.0);
    REQUIRE(v(0, 1) == 1.0);
    REQUIRE(v(1, 0) == 0.0);
    REQUIRE(v(1, 1) == 1.0);
    REQUIRE(v(2, 0) == 0.0);
    REQUIRE(v(2, 1) == 1.0);

    const Eigen::MatrixXd w = vandermonde({-1.0, 1.0}, 2);
    REQUIRE(w(1, 0) == -1.0);
    REQUIRE(w(1, 1) == 1.0);
}

TEST_CASE("square vandermonde determinant equals the pairwise gap product") {
    std::mt19937_64 rng(23);
    for (std::size_t d = 2; d <= 6; ++d) {
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> x(d);
            for (double& v : x) v = uniform_in(rng, -1.0, 1.0);
            std::sort(x.begin(), x.end());
            bool ok = true;
            for (std::size_t i = 0; i + 1 < d; ++i)
                if (x[i + 1] - x[i] < 0.05) ok = false;
            if (!ok) continue;
            double prod = 1.0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < i; ++j) prod *= x[i] - x[j];
            const double det = vandermonde(x, d).determinant();
            REQUIRE_THAT(det, Catch::Matchers::WithinRel(prod, 1e-10));
        }
    }
}

TEST_CASE("hankel_from_signal embeds small signals") {
    const HankelMatrix h = hankel_from_signal(validate_signal({1.0}, {0.0}), 2);
    REQUIRE(h.entry(0, 0) == 1.0);
    REQUIRE(h.entry(0, 1) == 0.0);
    REQUIRE(h.entry(1, 1) == 0.0);

    const HankelMatrix g = hankel_from_signal(validate_signal({1.0, 1.0}, {-1.0, 1.0}), 2);
    REQUIRE(g.entry(0, 0) == 2.0);
    REQUIRE(g.entry(0, 1) == 0.0);
    REQUIRE(g.entry(1, 1) == 2.0);

    REQUIRE_THROWS_AS(hankel_from_signal(validate_signal({1.0, 1.0}, {0.0, 1.0}), 1), shape_error);
}

TEST_CASE("hankel factorization identity holds for embedded signals") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t d = 2 + rep % 5;  // up to 6
        const std::size_t l = 1 + static_cast<std::size_t>(rng() % d);
        const Signal g = sample_regular_signal(l, RegularityParams{0.1, 0.1, {}}, rng);
        const HankelMatrix h = hankel_from_signal(g, d);
        const Eigen::MatrixXd alt = hankel_via_factorization(g, d);
        const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
        REQUIRE((h.matrix() - alt).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
}

TEST_CASE("hankel rank equals the node count for regular signals") {
    std::mt19937_64 rng(31);
    for (std::size_t l = 1; l <= 4; ++l) {
        for (int rep = 0; rep < 10; ++rep) {
            const Signal g = sample_regular_signal(l, RegularityParams{0.2, 0.2, {}}, rng);
            const HankelMatrix h = hankel_from_signal(g, 4);
            REQUIRE(numerical_rank(h, 1e-9) == static_cast<int>(l));
        }
    }
}

TEST_CASE("largest_minor on a 2x2 diagonal Hankel matrix") {
    const HankelMatrix h = build_hankel({2.0, 0.0, 2.0}, 2);
    const MinorReport r1 = largest_minor(h, 1);
    REQUIRE(r1.delta == 2.0);
    const MinorReport r2 = largest_minor(h, 2);
    REQUIRE(r2.delta == 4.0);
    REQUIRE(r2.row_indices == std::vector<int>{0, 1});
    REQUIRE(r2.col_indices == std::vector<int>{0, 1});
}

TEST_CASE("largest_minor tie-break is lexicographic") {
    // all 1-minors tie at |1|; the first (row, col) pair must win
    const HankelMatrix h = build_hankel({1.0, -1.0, 1.0}, 2);
    const MinorReport r = largest_minor(h, 1);
    REQUIRE(r.delta == 1.0);
    REQUIRE(r.row_indices == std::vector<int>{0});
    REQUIRE(r.col_indices == std::vector<int>{0});
    REQUIRE(r.value == 1.0);
}

TEST_CASE("largest_minor of a rank-1 embedding vanishes at order 2") {
    const HankelMatrix h = hankel_from_signal(validate_signal({0.7}, {0.4}), 3);
    REQUIRE(largest_minor(h, 2).delta <= 1e-15);
}

TEST_CASE("largest_minor agrees with brute-force enumeration") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 25; ++rep) {
        MomentVector m(7);
        for (double& v : m) v = uniform_in(rng, -2.0, 2.0);
        const HankelMatrix h = build_hankel(m, 4);
        for (std::size_t l = 1; l <= 4; ++l) {
            const MinorReport r = largest_minor(h, l);
            const double brute = brute_force_delta(h, l);
            REQUIRE_THAT(r.delta, Catch::Matchers::WithinAbs(brute, 1e-11));
            REQUIRE(std::abs(r.value) == r.delta);
        }
    }
}

TEST_CASE("minor magnitudes track the exact rank") {
    std::mt19937_64 rng(41);
    for (std::size_t l = 1; l <= 3; ++l) {
        const Signal g = sample_regular_signal(l, RegularityParams{0.4, 0.5, {}}, rng);
        const HankelMatrix h = hankel_from_signal(g, 4);
        for (std::size_t k = 1; k <= 4; ++k) {
            const double delta = largest_minor(h, k).delta;
            if (k <= l)
                REQUIRE(delta > 1e-12);
            else
                REQUIRE(delta <= 1e-12);
        }
    }
}

TEST_CASE("largest_minor guards dimension and order") {
    const HankelMatrix h = build_hankel({1.0, 0.0, 1.0}, 2);
    REQUIRE_THROWS_AS(largest_minor(h, 0), shape_error);
    REQUIRE_THROWS_AS(largest_minor(h, 3), shape_error);
    MomentVector big(2 * 11 - 1, 1.0);
    REQUIRE_THROWS_AS(largest_minor(build_hankel(big, 11), 2), shape_error);
}

TEST_CASE("numerical_rank basics") {
    const Signal two = validate_signal({1.0, 1.0}, {-1.0, 1.0});
    REQUIRE(numerical_rank(hankel_from_signal(two, 2), 1e-9) == 2);
    REQUIRE(numerical_rank(build_hankel({0.0, 0.0, 0.0}, 2), 1e-9) == 0);
    REQUIRE_THROWS_AS(numerical_rank(build_hankel({1.0, 0.0, 1.0}, 2), 0.0), shape_error);
}

TEST_CASE("numerical_rank drops to one on a tight cluster") {
    const Signal g = validate_signal({1.0, 1.0}, {-1.0, 1.0});
    const Signal f = downscale_cluster(g, 1e-3);
    const HankelMatrix h = hankel_from_signal(f, 2);
    REQUIRE(numerical_rank(h, 1e-2) == 1);
    REQUIRE(numerical_rank(h, 1e-9) == 2);
}
