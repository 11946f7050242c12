#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "prony/search.hpp"

using namespace prony;

namespace {

// Independent oracle for the best single-node approximant: dense grid scan
// over (amplitude, node) followed by local refinement of the grid winner.
double single_node_oracle(const MomentVector& target, double amp_box, double node_box) {
    auto dist = [&](double a, double x) {
        double p = a, sq = 0.0;
        for (std::size_t k = 0; k < target.size(); ++k) {
            const double g = p - target[k];
            sq += g * g;
            p *= x;
        }
        return std::sqrt(sq);
    };
    double best = std::numeric_limits<double>::infinity(), ba = 0.0, bx = 0.0;
    for (int i = -400; i <= 400; ++i)
        for (int j = -300; j <= 300; ++j) {
            const double a = amp_box * i / 400.0;
            const double x = node_box * j / 300.0;
            const double v = dist(a, x);
            if (v < best) {
                best = v;
                ba = a;
                bx = x;
            }
        }
    double step = std::max(amp_box / 400.0, node_box / 300.0);
    while (step > 1e-9) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& [da, dx] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step},
                                         {0.0, -step}, {step, step}, {-step, -step},
                                         {step, -step}, {-step, step}}) {
                const double v = dist(ba + da, bx + dx);
                if (v < best) {
                    best = v;
                    ba += da;
                    bx += dx;
                    moved = true;
                }
            }
        }
        step *= 0.5;
    }
    return best;
}

} // namespace

TEST_CASE("target zero nodes gives the exact moment norm") {
    const Signal f = validate_signal({0.4, -0.7, 0.2}, {-0.5, 0.1, 0.8});
    const MomentVector m = moments(f, 5);
    double sq = 0.0;
    for (double v : m) sq += v * v;

    SearchConfig cfg;
    cfg.target_nodes = 0;
    const SearchResult r = min_moment_distance(f, cfg);
    REQUIRE(r.distance == std::sqrt(sq));
    REQUIRE(r.best.size() == 0);
    REQUIRE(r.converged);
    REQUIRE(r.margin >= 0.0);
}

TEST_CASE("single-node optimum for the symmetric pair matches the grid oracle") {
    const Signal f = validate_signal({1.0, 1.0}, {-1.0, 1.0});
    SearchConfig cfg;
    cfg.target_nodes = 1;
    cfg.restarts = 24;
    cfg.rng_seed = 5;
    const SearchResult r = min_moment_distance(f, cfg);

    // analytic optimum: amplitude 4/3 at either +1 or -1, distance sqrt(8/3)
    const double expected = std::sqrt(8.0 / 3.0);
    const double oracle = single_node_oracle(moments(f, 3), cfg.amp_box, cfg.node_box);
    REQUIRE_THAT(oracle, Catch::Matchers::WithinAbs(expected, 1e-5));
    REQUIRE_THAT(r.distance, Catch::Matchers::WithinAbs(expected, 1e-5));
    REQUIRE(r.margin > 0.0);
    REQUIRE_THAT(r.certificate_theta, Catch::Matchers::WithinAbs(0.09622504486493764, 1e-12));
}

TEST_CASE("the worked member is matched on three moments but not on five") {
    // its first three moments admit an exact single-node match
    SearchConfig cfg;
    cfg.target_nodes = 1;
    cfg.restarts = 12;
    cfg.rng_seed = 7;
    const SearchResult on3 = min_distance_to_moments({1.8, 0.6, 0.2}, 2, cfg);
    REQUIRE(on3.distance <= 1e-6);

    const Signal f = validate_signal({1.0, 1.0, -0.2}, {0.0, 1.0, 2.0});
    const SearchResult on5 = min_moment_distance(f, cfg);
    REQUIRE(on5.distance > 1e-3);
    REQUIRE(on5.margin >= 0.0);
    // the order-3 certificate also holds for the single-node search
    const BoundCertificate c3 = theta_from_moments(moments(f, 5), 3, 3);
    REQUIRE(on5.distance >= c3.theta);
}

TEST_CASE("seeded starts lead with the known fits and stay inside the boxes") {
    const Signal f = validate_signal({1.0, 1.0}, {-1.0, 1.0});
    SearchConfig cfg;
    cfg.target_nodes = 1;
    cfg.restarts = 8;
    cfg.rng_seed = 11;
    const auto starts = seeded_starts(f, cfg);
    REQUIRE(starts.size() == 8);
    // first start is exactly the single-node moment fit (mass 2 at 0)
    REQUIRE(starts[0].amplitudes == std::vector<double>{2.0});
    REQUIRE(starts[0].nodes == std::vector<double>{0.0});
    for (const StartPoint& s : starts) {
        for (double a : s.amplitudes) REQUIRE(std::abs(a) <= cfg.amp_box);
        for (double x : s.nodes) REQUIRE(std::abs(x) <= cfg.node_box);
    }
    // deterministic under the same seed
    const auto again = seeded_starts(f, cfg);
    REQUIRE(again.size() == starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        REQUIRE(again[i].amplitudes == starts[i].amplitudes);
        REQUIRE(again[i].nodes == starts[i].nodes);
    }
}

TEST_CASE("search is deterministic for a fixed seed") {
    const Signal f = validate_signal({0.6, -0.8, 0.3}, {-0.7, 0.0, 0.5});
    SearchConfig cfg;
    cfg.target_nodes = 2;
    cfg.restarts = 10;
    cfg.rng_seed = 13;
    const SearchResult a = min_moment_distance(f, cfg);
    const SearchResult b = min_moment_distance(f, cfg);
    REQUIRE(a.distance == b.distance);
    REQUIRE(a.best.nodes == b.best.nodes);
    REQUIRE(a.best.amplitudes == b.best.amplitudes);
}

TEST_CASE("a larger node budget never fits worse") {
    std::mt19937_64 rng(139);
    for (int rep = 0; rep < 8; ++rep) {
        const Signal f = sample_regular_signal(4, RegularityParams{0.2, 0.3, {}}, rng);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t <= 3; ++t) {
            SearchConfig cfg;
            cfg.target_nodes = t;
            cfg.restarts = 30;
            cfg.rng_seed = 1000 + static_cast<std::uint64_t>(rep);
            const SearchResult r = min_moment_distance(f, cfg);
            REQUIRE(r.distance <= prev + 1e-6);
            prev = r.distance;
        }
    }
}

TEST_CASE("search results satisfy the certificate bound on regular signals") {
    std::mt19937_64 rng(149);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t d = 2 + rep % 3;
        const Signal f = sample_regular_signal(d, RegularityParams{0.15, 0.2, {}}, rng);
        for (std::size_t t = 0; t < d; ++t) {
            SearchConfig cfg;
            cfg.target_nodes = t;
            cfg.restarts = 15;
            cfg.rng_seed = 2000 + static_cast<std::uint64_t>(rep);
            const SearchResult r = min_moment_distance(f, cfg);
            REQUIRE(r.margin >= 0.0);
            REQUIRE(r.best.size() <= t);
        }
    }
}

TEST_CASE("search rejects budgets at or above the node count") {
    const Signal f = validate_signal({1.0, 1.0}, {-1.0, 1.0});
    SearchConfig cfg;
    cfg.target_nodes = 2;
    REQUIRE_THROWS_AS(min_moment_distance(f, cfg), shape_error);
}

TEST_CASE("canonicalized results carry no negligible amplitudes") {
    std::mt19937_64 rng(151);
    for (int rep = 0; rep < 10; ++rep) {
        const Signal f = sample_regular_signal(3, RegularityParams{0.2, 0.3, {}}, rng);
        SearchConfig cfg;
        cfg.target_nodes = 2;
        cfg.restarts = 10;
        cfg.rng_seed = 3000 + static_cast<std::uint64_t>(rep);
        const SearchResult r = min_moment_distance(f, cfg);
        for (double a : r.best.amplitudes) REQUIRE(std::abs(a) > 1e-10);
        for (std::size_t i = 0; i + 1 < r.best.size(); ++i)
            REQUIRE(r.best.nodes[i] < r.best.nodes[i + 1]);
    }
}
