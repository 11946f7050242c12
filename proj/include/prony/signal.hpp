#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "prony/errors.hpp"
#include "prony/rng.hpp"

namespace prony {

using MomentVector = std::vector<double>;

// Nodes closer than this are treated as coincident.
inline constexpr double kNodeCoincidenceTol = 1e-12;

// A spike train: d point masses a_i at strictly increasing positions x_i.
// d == 0 encodes the identically zero signal.
struct Signal {
    std::vector<double> amplitudes;
    std::vector<double> nodes;

    std::size_t size() const { return nodes.size(); }
};

// Sorts the nodes (permuting amplitudes consistently) and rejects
// coincident nodes, zero amplitudes and length mismatches.
inline Signal validate_signal(const std::vector<double>& amplitudes,
                              const std::vector<double>& nodes) {
    if (amplitudes.size() != nodes.size())
        throw shape_error("validate_signal: amplitude/node length mismatch");
    const std::size_t d = nodes.size();

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return nodes[i] < nodes[j]; });

    Signal out;
    out.amplitudes.reserve(d);
    out.nodes.reserve(d);
    for (std::size_t i : order) {
        out.amplitudes.push_back(amplitudes[i]);
        out.nodes.push_back(nodes[i]);
    }

    for (std::size_t i = 0; i + 1 < d; ++i)
        if (out.nodes[i + 1] - out.nodes[i] < kNodeCoincidenceTol)
            throw degenerate_nodes("validate_signal: coincident nodes");
    for (double a : out.amplitudes)
        if (a == 0.0)
            throw zero_amplitude("validate_signal: zero amplitude");
    return out;
}

// m_k = sum_j a_j x_j^k for k = 0 .. count-1.
inline MomentVector moments(const Signal& f, std::size_t count) {
    if (count < 1)
        throw shape_error("moments: count must be >= 1");
    MomentVector m(count, 0.0);
    for (std::size_t j = 0; j < f.size(); ++j) {
        double p = f.amplitudes[j];
        for (std::size_t k = 0; k < count; ++k) {
            m[k] += p;
            p *= f.nodes[j];
        }
    }
    return m;
}

inline bool is_normalized(const Signal& f) {
    for (double x : f.nodes)
        if (!(std::abs(x) <= 1.0)) return false;
    for (double a : f.amplitudes)
        if (!(std::abs(a) <= 1.0)) return false;
    return true;
}

// A signal whose nodes and amplitudes are all within [-1, 1].
class NormalizedSignal {
public:
    explicit NormalizedSignal(Signal s) : signal_(std::move(s)) {
        if (!is_normalized(signal_))
            throw not_normalized("NormalizedSignal: node or amplitude outside [-1, 1]");
    }
    const Signal& get() const { return signal_; }

private:
    Signal signal_;
};

// Separation/size parameters: minimal neighbor gap eta, minimal amplitude
// magnitude gamma, optional cluster scale h.
struct RegularityParams {
    double eta = 0.0;
    double gamma = 0.0;
    std::optional<double> h;

    bool valid_for(std::size_t d) const {
        if (!(eta > 0.0)) return false;
        if (!(gamma > 0.0 && gamma <= 1.0)) return false;
        if (d >= 2 && eta > 2.0 / static_cast<double>(d - 1)) return false;
        if (h && !(*h > 0.0 && *h <= 1.0)) return false;
        return true;
    }
};

// True iff neighboring gaps are >= eta and every |a_i| >= gamma.
// The signal must be normalized; single-node signals have no gap condition.
inline bool check_regularity(const Signal& f, const RegularityParams& p) {
    if (f.size() < 1)
        throw shape_error("check_regularity: empty signal");
    if (!is_normalized(f))
        throw not_normalized("check_regularity: signal not in the unit box");
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        min_gap = std::min(min_gap, f.nodes[i + 1] - f.nodes[i]);
    double min_amp = std::numeric_limits<double>::infinity();
    for (double a : f.amplitudes)
        min_amp = std::min(min_amp, std::abs(a));
    return min_gap >= p.eta && min_amp >= p.gamma;
}

// Scales every node by h in (0, 1]; amplitudes are unchanged, so the k-th
// moment gets multiplied by h^k.
inline Signal downscale_cluster(const Signal& g, double h) {
    if (!(h > 0.0) || h > 1.0)
        throw bad_scale("downscale_cluster: h must be in (0, 1]");
    Signal f = g;
    for (double& x : f.nodes) x *= h;
    return f;
}

// Component-wise uniform noise on [-epsilon, epsilon], deterministic per seed.
// The returned vector satisfies |nu_k - m_k| <= epsilon exactly.
inline MomentVector perturb_moments(const MomentVector& m, double epsilon,
                                    std::uint64_t rng_seed) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw bad_noise("perturb_moments: epsilon must be a nonnegative real");
    std::mt19937_64 rng(rng_seed);
    MomentVector nu(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double delta = epsilon * (2.0 * uniform_unit(rng) - 1.0);
        double v = m[k] + delta;
        // rounding in the sum may land just outside the band
        while (std::abs(v - m[k]) > epsilon) v = std::nextafter(v, m[k]);
        nu[k] = v;
    }
    return nu;
}

// Draws an (eta, gamma)-regular signal in the unit box: nodes are a minimal
// eta-grid from -1 shifted by sorted uniform slack, |a_i| uniform in
// [gamma, 1] with random sign.
inline Signal sample_regular_signal(std::size_t d, const RegularityParams& p,
                                    std::mt19937_64& rng) {
    if (d < 1)
        throw shape_error("sample_regular_signal: d must be >= 1");
    if (!p.valid_for(d))
        throw shape_error("sample_regular_signal: parameters infeasible for d");
    const double slack = 2.0 - static_cast<double>(d - 1) * p.eta;
    std::vector<double> s(d);
    for (double& v : s) v = uniform_in(rng, 0.0, slack);
    std::sort(s.begin(), s.end());
    std::vector<double> nodes(d), amps(d);
    for (std::size_t i = 0; i < d; ++i) {
        nodes[i] = -1.0 + static_cast<double>(i) * p.eta + s[i];
        amps[i] = random_sign(rng) * uniform_in(rng, p.gamma, 1.0);
    }
    return validate_signal(amps, nodes);
}

// Draws a signal in the unit box with pairwise node gaps >= min_gap and
// amplitude magnitudes >= min_amp (rejection sampling).
inline Signal sample_normalized_signal(std::size_t d, double min_gap, double min_amp,
                                       std::mt19937_64& rng) {
    if (d < 1)
        throw shape_error("sample_normalized_signal: d must be >= 1");
    std::vector<double> nodes(d), amps(d);
    for (;;) {
        for (double& x : nodes) x = uniform_in(rng, -1.0, 1.0);
        std::sort(nodes.begin(), nodes.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < d; ++i)
            if (nodes[i + 1] - nodes[i] < min_gap) { ok = false; break; }
        if (ok) break;
    }
    for (double& a : amps) {
        do {
            a = uniform_in(rng, -1.0, 1.0);
        } while (std::abs(a) < min_amp);
    }
    return validate_signal(amps, nodes);
}

} // namespace prony
