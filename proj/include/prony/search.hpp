#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "prony/bounds.hpp"
#include "prony/inversion.hpp"
#include "prony/signal.hpp"

namespace prony {

struct SearchConfig {
    std::size_t target_nodes = 0;  // competitor node budget, must be < d
    int restarts = 20;
    int max_iters = 2000;
    double tol = 1e-12;
    double node_box = 3.0;   // search |x| <= node_box
    double amp_box = 10.0;   // search |a| <= amp_box
    std::uint64_t rng_seed = 0;
};

struct SearchResult {
    Signal best;
    double distance = 0.0;           // ||target - moments(best)|| over 2d-1 moments
    double certificate_theta = 0.0;  // matching lower-bound certificate
    double margin = 0.0;             // distance - certificate_theta
    bool converged = false;
    bool box_hit = false;  // best point touches a search box wall
};

// Initial point of one local search: amplitudes then nodes, both length
// target_nodes (entries may be degenerate; the optimizer does not require a
// valid signal).
struct StartPoint {
    std::vector<double> amplitudes;
    std::vector<double> nodes;
};

namespace detail {

inline void clamp_into(std::vector<double>& v, double lo, double hi) {
    for (double& x : v) x = std::clamp(x, lo, hi);
}

// Squared moment distance of a candidate (amps, nodes) pair to the target.
inline double moment_distance_sq(const double* amps, const double* nodes, std::size_t t,
                                 const MomentVector& target) {
    double sq = 0.0;
    std::vector<double> m(target.size(), 0.0);
    for (std::size_t j = 0; j < t; ++j) {
        double p = amps[j];
        for (std::size_t k = 0; k < m.size(); ++k) {
            m[k] += p;
            p *= nodes[j];
        }
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double g = m[k] - target[k];
        sq += g * g;
    }
    return sq;
}

struct NelderMeadOutcome {
    std::vector<double> point;
    double value = 0.0;
    bool converged = false;
};

// Standard downhill simplex: reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. Stops when the value spread and simplex diameter fall under tol.
inline NelderMeadOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x0,
                                     const std::vector<double>& steps, int max_iters,
                                     double tol) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadOutcome out;
    for (int it = 0; it < max_iters; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        double spread = vals[worst] - vals[best];
        double diam = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diam = std::max(diam, std::abs(pts[worst][i] - pts[best][i]));
        if (spread <= tol * (1.0 + std::abs(vals[best])) && diam <= std::sqrt(tol)) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
            return p;
        };

        const std::vector<double> refl = blend(-1.0);
        const double frefl = f(refl);
        if (frefl < vals[order[0]]) {
            const std::vector<double> exp = blend(-2.0);
            const double fexp = f(exp);
            if (fexp < frefl) {
                pts[worst] = exp;
                vals[worst] = fexp;
            } else {
                pts[worst] = refl;
                vals[worst] = frefl;
            }
        } else if (frefl < vals[second]) {
            pts[worst] = refl;
            vals[worst] = frefl;
        } else {
            const bool outside = frefl < vals[worst];
            const std::vector<double> con = blend(outside ? -0.5 : 0.5);
            const double fcon = f(con);
            if (fcon < std::min(frefl, vals[worst])) {
                pts[worst] = con;
                vals[worst] = fcon;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    std::size_t ibest = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (vals[i] < vals[ibest]) ibest = i;
    out.point = pts[ibest];
    out.value = vals[ibest];
    return out;
}

// Merge coincident nodes, prune negligible amplitudes, sort.
inline Signal canonicalize(std::vector<double> amps, std::vector<double> nodes) {
    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<double> xs, as;
    for (std::size_t idx : order) {
        if (!xs.empty() && nodes[idx] - xs.back() < kNodeCoincidenceTol) {
            as.back() += amps[idx];
        } else {
            xs.push_back(nodes[idx]);
            as.push_back(amps[idx]);
        }
    }
    std::vector<double> fx, fa;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(as[i]) > kAmplitudePruneTol) {
            fx.push_back(xs[i]);
            fa.push_back(as[i]);
        }
    }
    if (fx.empty()) return Signal{};
    return validate_signal(fa, fx);
}

} // namespace detail

// Start list against an arbitrary target moment vector: the truncated Prony
// solve when it is real, the single-node fit when the budget is one, then
// uniform draws in the boxes up to cfg.restarts. All starts lie inside the
// boxes and the list is deterministic for a fixed seed.
inline std::vector<StartPoint> seeded_starts_for(const MomentVector& target,
                                                 const SearchConfig& cfg) {
    const std::size_t t = cfg.target_nodes;
    std::vector<StartPoint> starts;
    if (t == 0 || cfg.restarts < 1) return starts;

    auto push = [&](std::vector<double> amps, std::vector<double> nodes) {
        // pad short candidates with silent nodes spread over the box
        std::size_t have = nodes.size();
        for (std::size_t i = have; i < t; ++i) {
            nodes.push_back(-cfg.node_box / 2.0
                            + static_cast<double>(i - have + 1) * cfg.node_box
                                  / static_cast<double>(t - have + 1));
            amps.push_back(0.0);
        }
        detail::clamp_into(amps, -cfg.amp_box, cfg.amp_box);
        detail::clamp_into(nodes, -cfg.node_box, cfg.node_box);
        starts.push_back(StartPoint{std::move(amps), std::move(nodes)});
    };

    if (t == 1 && target.size() >= 2 && target[0] != 0.0) {
        const Signal s = fit_single_node(target);
        push(s.amplitudes, s.nodes);
    }
    if (target.size() >= 2 * t) {
        try {
            MomentVector head(target.begin(), target.begin() + static_cast<long>(2 * t));
            const PronySolution s = prony_solve(PronyProblem{head, t});
            push(s.signal.amplitudes, s.signal.nodes);
        } catch (const error&) {
            // no real truncated solution; purely random starts take over
        }
    }

    std::mt19937_64 rng(cfg.rng_seed);
    while (starts.size() < static_cast<std::size_t>(cfg.restarts)) {
        std::vector<double> amps(t), nodes(t);
        for (double& a : amps) a = uniform_in(rng, -cfg.amp_box, cfg.amp_box);
        for (double& x : nodes) x = uniform_in(rng, -cfg.node_box, cfg.node_box);
        push(std::move(amps), std::move(nodes));
    }
    return starts;
}

inline std::vector<StartPoint> seeded_starts(const Signal& f, const SearchConfig& cfg) {
    if (f.size() < 1)
        throw shape_error("seeded_starts: empty signal");
    return seeded_starts_for(moments(f, 2 * f.size() - 1), cfg);
}

// Multi-start simplex minimization of the Euclidean distance between the
// target moment vector (length 2d-1) and the moments of a signal with at
// most cfg.target_nodes nodes. The reported certificate is computed from the
// same target vector with l = target_nodes + 1.
inline SearchResult min_distance_to_moments(const MomentVector& target, std::size_t d,
                                            const SearchConfig& cfg) {
    if (d < 1)
        throw shape_error("min_distance_to_moments: d must be >= 1");
    if (cfg.target_nodes >= d)
        throw shape_error("min_distance_to_moments: node budget must be below d");
    if (target.size() != 2 * d - 1)
        throw shape_error("min_distance_to_moments: target must hold 2d-1 moments");
    if (cfg.restarts < 1 || !(cfg.tol > 0.0) || !(cfg.node_box > 0.0) || !(cfg.amp_box > 0.0))
        throw shape_error("min_distance_to_moments: invalid search configuration");

    const std::size_t t = cfg.target_nodes;
    const BoundCertificate cert = theta_from_moments(target, d, t + 1);

    SearchResult result;
    result.certificate_theta = cert.theta;

    if (t == 0) {
        // the zero signal is the only candidate
        double sq = 0.0;
        for (double v : target) sq += v * v;
        result.best = Signal{};
        result.distance = std::sqrt(sq);
        result.margin = result.distance - cert.theta;
        result.converged = true;
        return result;
    }

    const double penalty_weight = 1e3;
    auto objective = [&](const std::vector<double>& p) {
        double pen = 0.0;
        std::vector<double> amps(p.begin(), p.begin() + static_cast<long>(t));
        std::vector<double> nodes(p.begin() + static_cast<long>(t), p.end());
        for (double& a : amps) {
            const double c = std::clamp(a, -cfg.amp_box, cfg.amp_box);
            pen += (a - c) * (a - c);
            a = c;
        }
        for (double& x : nodes) {
            const double c = std::clamp(x, -cfg.node_box, cfg.node_box);
            pen += (x - c) * (x - c);
            x = c;
        }
        return detail::moment_distance_sq(amps.data(), nodes.data(), t, target)
             + penalty_weight * pen;
    };

    double best_sq = std::numeric_limits<double>::infinity();
    std::vector<double> best_point;
    bool best_converged = false;

    for (const StartPoint& s : seeded_starts_for(target, cfg)) {
        std::vector<double> x0;
        x0.insert(x0.end(), s.amplitudes.begin(), s.amplitudes.end());
        x0.insert(x0.end(), s.nodes.begin(), s.nodes.end());
        std::vector<double> steps(2 * t);
        for (std::size_t i = 0; i < t; ++i)
            steps[i] = 0.1 * std::max(1.0, std::abs(x0[i]));
        for (std::size_t i = t; i < 2 * t; ++i) steps[i] = 0.1;

        auto run = detail::nelder_mead(objective, x0, steps, cfg.max_iters, cfg.tol);
        if (run.value < best_sq) {
            best_sq = run.value;
            best_point = run.point;
            best_converged = run.converged;
        }
    }

    std::vector<double> amps(best_point.begin(), best_point.begin() + static_cast<long>(t));
    std::vector<double> nodes(best_point.begin() + static_cast<long>(t), best_point.end());
    detail::clamp_into(amps, -cfg.amp_box, cfg.amp_box);
    detail::clamp_into(nodes, -cfg.node_box, cfg.node_box);

    result.best = detail::canonicalize(amps, nodes);
    const MomentVector bm = moments(result.best, target.size());
    double sq = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double g = bm[k] - target[k];
        sq += g * g;
    }
    result.distance = std::sqrt(sq);
    result.margin = result.distance - cert.theta;
    result.converged = best_converged;
    for (double a : result.best.amplitudes)
        if (std::abs(a) >= cfg.amp_box - 1e-9) result.box_hit = true;
    for (double x : result.best.nodes)
        if (std::abs(x) >= cfg.node_box - 1e-9) result.box_hit = true;
    return result;
}

inline SearchResult min_moment_distance(const Signal& f, const SearchConfig& cfg) {
    if (f.size() < 1)
        throw shape_error("min_moment_distance: empty signal");
    return min_distance_to_moments(moments(f, 2 * f.size() - 1), f.size(), cfg);
}

} // namespace prony
