#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "prony/bounds.hpp"
#include "prony/io.hpp"
#include "prony/rng.hpp"
#include "prony/search.hpp"
#include "prony/signal.hpp"

namespace prony {

namespace detail {

// Runs fn(0..n-1) on a small pool; cells are independent and results land in
// preallocated slots, so scheduling cannot change the output.
template <class Fn>
inline void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Moment indices entering a minor: the sums r + c over its index sets.
inline std::vector<int> minor_moment_indices(const MinorReport& r) {
    std::set<int> s;
    for (int i : r.row_indices)
        for (int j : r.col_indices) s.insert(i + j);
    return {s.begin(), s.end()};
}

} // namespace detail

// Euclidean distance between two moment vectors restricted to a coordinate
// subset. A single coordinate is measured as |difference| directly; going
// through sqrt(g^2) can land one ulp short.
inline double restricted_moment_distance(const MomentVector& a, const MomentVector& b,
                                         const std::vector<int>& indices) {
    if (indices.size() == 1) {
        const auto k = static_cast<std::size_t>(indices.front());
        return std::abs(a[k] - b[k]);
    }
    double sq = 0.0;
    for (int k : indices) {
        const double g = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
        sq += g * g;
    }
    return std::sqrt(sq);
}

// ---- bound sweep ----------------------------------------------------------

struct SweepSpec {
    std::vector<int> d;
    std::vector<int> l;
    std::vector<double> eta;
    std::vector<double> gamma;
    std::vector<double> h{1.0};
    std::vector<double> epsilon{0.0};
    int signals_per_cell = 1;
    std::uint64_t seed = 0;
    int restarts = 20;
    int max_iters = 2000;
    double tol = 1e-12;
    double node_box = 3.0;
    double amp_box = 10.0;
};

struct SweepRow {
    int d = 0;
    int l = 0;
    double eta = 0.0;
    double gamma = 0.0;
    double h = 1.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double delta_l = 0.0;
    double zeta = 0.0;
    double theta = 0.0;  // cluster bound theta_h when h < 1, minor bound otherwise
    double distance = 0.0;
    double margin = 0.0;
    double restricted_distance = 0.0;
    double restricted_margin = 0.0;
    bool box_hit = false;
    bool converged = false;
};

inline SweepSpec parse_sweep_spec(const nlohmann::json& j) {
    SweepSpec s;
    auto ints = [&](const char* key) {
        std::vector<int> v;
        for (const auto& e : j.at(key)) v.push_back(e.get<int>());
        return detail::sorted_unique(v);
    };
    auto reals = [&](const char* key) {
        return detail::sorted_unique(j.at(key).get<std::vector<double>>());
    };
    s.d = ints("d");
    s.l = ints("l");
    s.eta = reals("eta");
    s.gamma = reals("gamma");
    if (j.contains("h")) s.h = reals("h");
    if (j.contains("epsilon")) s.epsilon = reals("epsilon");
    if (j.contains("signals_per_cell")) s.signals_per_cell = j["signals_per_cell"].get<int>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("restarts")) s.restarts = j["restarts"].get<int>();
    if (j.contains("max_iters")) s.max_iters = j["max_iters"].get<int>();
    if (j.contains("tol")) s.tol = j["tol"].get<double>();
    if (j.contains("node_box")) s.node_box = j["node_box"].get<double>();
    if (j.contains("amp_box")) s.amp_box = j["amp_box"].get<double>();

    if (s.d.empty() || s.l.empty() || s.eta.empty() || s.gamma.empty() || s.h.empty()
        || s.epsilon.empty())
        throw shape_error("bound sweep: empty parameter grid");
    if (s.signals_per_cell < 1)
        throw shape_error("bound sweep: signals_per_cell must be >= 1");
    for (double e : s.epsilon)
        if (e < 0.0) throw bad_noise("bound sweep: negative epsilon");
    return s;
}

// One row per grid cell per sampled signal, sorted by grid key. Rows with a
// negative margin also produce a prominent line on the warnings stream.
inline std::vector<SweepRow> run_bound_sweep(const SweepSpec& spec,
                                             std::ostream* warnings = nullptr) {
    struct Task {
        int d, l, sample;
        double eta, gamma, h, epsilon;
    };
    std::vector<Task> tasks;
    for (int d : spec.d)
        for (int l : spec.l) {
            if (l < 1 || l > d) continue;  // not a defined cell
            for (double eta : spec.eta)
                for (double gamma : spec.gamma) {
                    RegularityParams p{eta, gamma, std::nullopt};
                    if (!p.valid_for(static_cast<std::size_t>(d))) continue;
                    for (double h : spec.h)
                        for (double epsilon : spec.epsilon)
                            for (int s = 0; s < spec.signals_per_cell; ++s)
                                tasks.push_back(Task{d, l, s, eta, gamma, h, epsilon});
                }
        }
    if (tasks.empty())
        throw shape_error("bound sweep: grid contains no valid cells");

    std::vector<SweepRow> rows(tasks.size());
    detail::parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& t = tasks[i];
        SweepRow row;
        row.d = t.d;
        row.l = t.l;
        row.eta = t.eta;
        row.gamma = t.gamma;
        row.h = t.h;
        row.epsilon = t.epsilon;
        row.seed = derive_seed(spec.seed, i, 0xb01dULL);

        std::mt19937_64 rng(row.seed);
        const auto d = static_cast<std::size_t>(t.d);
        const Signal g = sample_regular_signal(d, RegularityParams{t.eta, t.gamma, {}}, rng);
        const Signal f = downscale_cluster(g, t.h);
        const MomentVector exact = moments(f, 2 * d - 1);
        const MomentVector nu = perturb_moments(exact, t.epsilon, derive_seed(row.seed, 1));

        const BoundCertificate cert =
            theta_from_moments(nu, d, static_cast<std::size_t>(t.l));
        row.delta_l = cert.delta;
        row.zeta = cert.zeta;
        if (t.h < 1.0 && t.epsilon == 0.0) {
            // the parametric cluster bound speaks about exact cluster moments;
            // under noise the minor bound below still applies to nu directly
            RegularityParams cp{t.eta, t.gamma, t.h};
            row.theta = cluster_theta(d, cp).theta_h;
        } else {
            row.theta = cert.theta;
        }

        SearchConfig cfg;
        cfg.target_nodes = static_cast<std::size_t>(t.l - 1);
        cfg.restarts = spec.restarts;
        cfg.max_iters = spec.max_iters;
        cfg.tol = spec.tol;
        cfg.node_box = spec.node_box;
        cfg.amp_box = spec.amp_box;
        cfg.rng_seed = derive_seed(row.seed, 2);
        const SearchResult res = min_distance_to_moments(nu, d, cfg);
        row.distance = res.distance;
        row.margin = res.distance - row.theta;
        row.box_hit = res.box_hit;
        row.converged = res.converged;

        // distance restricted to the moments entering the maximizing minor,
        // measured against the minor-based bound
        const MomentVector bm = moments(res.best, nu.size());
        row.restricted_distance =
            restricted_moment_distance(nu, bm, detail::minor_moment_indices(*cert.minor));
        row.restricted_margin = row.restricted_distance - cert.theta;

        rows[i] = row;
    });

    if (warnings) {
        for (const SweepRow& r : rows) {
            if (r.margin < 0.0 || r.restricted_margin < 0.0)
                *warnings << "BOUND VIOLATION: d=" << r.d << " l=" << r.l << " eta=" << r.eta
                          << " gamma=" << r.gamma << " h=" << r.h << " epsilon=" << r.epsilon
                          << " seed=" << r.seed << " distance=" << format_double(r.distance)
                          << " theta=" << format_double(r.theta)
                          << " margin=" << format_double(r.margin)
                          << " restricted_margin=" << format_double(r.restricted_margin)
                          << "\n";
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "d,l,eta,gamma,h,epsilon,seed,delta_l,zeta,theta,distance,margin,"
          "restricted_distance,restricted_margin,box_hit,converged\n";
    for (const SweepRow& r : rows) {
        os << r.d << ',' << r.l << ',' << format_double(r.eta) << ',' << format_double(r.gamma)
           << ',' << format_double(r.h) << ',' << format_double(r.epsilon) << ',' << r.seed << ','
           << format_double(r.delta_l) << ',' << format_double(r.zeta) << ','
           << format_double(r.theta) << ',' << format_double(r.distance) << ','
           << format_double(r.margin) << ',' << format_double(r.restricted_distance) << ','
           << format_double(r.restricted_margin) << ',' << (r.box_hit ? 1 : 0) << ','
           << (r.converged ? 1 : 0) << '\n';
    }
}

// ---- rank drop --------------------------------------------------------------

struct RankDropSpec {
    std::vector<int> d;
    std::vector<double> h;
    std::vector<double> epsilon;
    std::vector<double> tol;
    double eta = 0.5;
    double gamma = 0.5;
    int signals_per_cell = 1;
    std::uint64_t seed = 0;
};

struct RankDropRow {
    int d = 0;
    double eta = 0.0;
    double gamma = 0.0;
    double h = 1.0;
    double epsilon = 0.0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    int rank = 0;
};

inline RankDropSpec parse_rank_drop_spec(const nlohmann::json& j) {
    RankDropSpec s;
    std::vector<int> dv;
    for (const auto& e : j.at("d")) dv.push_back(e.get<int>());
    s.d = detail::sorted_unique(dv);
    s.h = detail::sorted_unique(j.at("h").get<std::vector<double>>());
    s.epsilon = detail::sorted_unique(j.at("epsilon").get<std::vector<double>>());
    s.tol = detail::sorted_unique(j.at("tol").get<std::vector<double>>());
    if (j.contains("eta")) s.eta = j["eta"].get<double>();
    if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
    if (j.contains("signals_per_cell")) s.signals_per_cell = j["signals_per_cell"].get<int>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();

    if (s.d.empty() || s.h.empty() || s.epsilon.empty() || s.tol.empty())
        throw shape_error("rank drop: empty parameter grid");
    if (s.signals_per_cell < 1)
        throw shape_error("rank drop: signals_per_cell must be >= 1");
    for (double e : s.epsilon)
        if (e < 0.0) throw bad_noise("rank drop: negative epsilon");
    for (double t : s.tol)
        if (!(t > 0.0)) throw shape_error("rank drop: tolerance must be positive");
    return s;
}

// Numerical rank of the noisy cluster Hankel matrix per grid cell.
inline std::vector<RankDropRow> run_rank_drop(const RankDropSpec& spec) {
    struct Task {
        int d, sample;
        double h, epsilon, tol;
    };
    std::vector<Task> tasks;
    for (int d : spec.d) {
        RegularityParams p{spec.eta, spec.gamma, std::nullopt};
        if (!p.valid_for(static_cast<std::size_t>(d))) continue;
        for (double h : spec.h)
            for (double epsilon : spec.epsilon)
                for (double tol : spec.tol)
                    for (int s = 0; s < spec.signals_per_cell; ++s)
                        tasks.push_back(Task{d, s, h, epsilon, tol});
    }
    if (tasks.empty())
        throw shape_error("rank drop: grid contains no valid cells");

    std::vector<RankDropRow> rows(tasks.size());
    detail::parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& t = tasks[i];
        RankDropRow row;
        row.d = t.d;
        row.eta = spec.eta;
        row.gamma = spec.gamma;
        row.h = t.h;
        row.epsilon = t.epsilon;
        row.tol = t.tol;
        row.seed = derive_seed(spec.seed, i, 0x72616e6bULL);

        std::mt19937_64 rng(row.seed);
        const auto d = static_cast<std::size_t>(t.d);
        const Signal g = sample_regular_signal(d, RegularityParams{spec.eta, spec.gamma, {}}, rng);
        const Signal f = downscale_cluster(g, t.h);
        const MomentVector nu =
            perturb_moments(moments(f, 2 * d - 1), t.epsilon, derive_seed(row.seed, 1));
        row.rank = numerical_rank(build_hankel(nu, d), t.tol);
        rows[i] = row;
    });
    return rows;
}

inline void write_rank_drop_csv(const std::vector<RankDropRow>& rows, std::ostream& os) {
    os << "d,eta,gamma,h,epsilon,tol,seed,rank\n";
    for (const RankDropRow& r : rows) {
        os << r.d << ',' << format_double(r.eta) << ',' << format_double(r.gamma) << ','
           << format_double(r.h) << ',' << format_double(r.epsilon) << ','
           << format_double(r.tol) << ',' << r.seed << ',' << r.rank << '\n';
    }
}

} // namespace prony
