// Command line front end: moment evaluation, membership checks, branch
// sampling, bound/search sweeps and rank-drop experiments. All input is JSON,
// all output is JSON or CSV with 17-significant-digit floats.
//
// Exit codes: 0 affirmative, 1 negative verdict (not a member, rejected
// sample, no real solution, violated bound), 2 error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "prony/prony.hpp"

namespace {

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitError = 2;

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw prony::error("cannot open output file: " + path);
    return file;
}

int cmd_moments(const std::string& signal_path, long count) {
    const prony::Signal f = prony::load_signal(signal_path);
    std::size_t n = count > 0 ? static_cast<std::size_t>(count)
                              : (f.size() > 0 ? 2 * f.size() - 1 : 1);
    std::cout << prony::json_array(prony::moments(f, n)) << "\n";
    return kExitYes;
}

int cmd_sigma_check(const std::string& signal_path, double tolerance) {
    const prony::Signal f = prony::load_signal(signal_path);
    const prony::SigmaCertificate cert = prony::sigma_membership(f, tolerance);
    std::cout << prony::sigma_certificate_to_json(cert) << "\n";
    return cert.member ? kExitYes : kExitNo;
}

int cmd_sigma_sample(const std::vector<double>& nodes, int branch, double lambda,
                     std::vector<double> u_coeffs) {
    if (nodes.size() >= 2 && u_coeffs.empty())
        u_coeffs.assign(nodes.size() - 2, 0.0);
    const prony::BranchSample sample = prony::sample_branch(nodes, branch, lambda, u_coeffs);
    if (!sample.signal) {
        std::cerr << "rejected: "
                  << (sample.rejection == prony::BranchRejection::zero_amplitude
                          ? "amplitude vector has a zero entry"
                          : "no real branch coefficient for this component")
                  << "\n";
        return kExitNo;
    }
    std::cout << prony::signal_to_json(*sample.signal) << "\n";
    return kExitYes;
}

int cmd_prony_solve(const std::string& moments_path, long l) {
    const prony::MomentVector m = prony::load_moments(moments_path);
    if (l < 1) throw prony::shape_error("prony solve: --nodes must be >= 1");
    try {
        const prony::PronySolution sol =
            prony::prony_solve(prony::PronyProblem{m, static_cast<std::size_t>(l)});
        std::cout << prony::prony_solution_to_json(sol) << "\n";
        return kExitYes;
    } catch (const prony::no_real_solution& e) {
        std::cerr << e.what() << "\n";
        return kExitNo;
    }
}

struct SweepOverrides {
    std::optional<int> restarts;
    std::optional<int> signals_per_cell;
    std::optional<std::uint64_t> seed;
};

int cmd_bound_sweep(const std::string& spec_path, const std::string& out_path,
                    const SweepOverrides& ov) {
    prony::SweepSpec spec = prony::parse_sweep_spec(prony::load_json_file(spec_path));
    if (ov.restarts) spec.restarts = *ov.restarts;
    if (ov.signals_per_cell) spec.signals_per_cell = *ov.signals_per_cell;
    if (ov.seed) spec.seed = *ov.seed;

    const std::vector<prony::SweepRow> rows = prony::run_bound_sweep(spec, &std::cerr);
    std::ofstream file;
    prony::write_sweep_csv(rows, open_output(file, out_path));
    for (const prony::SweepRow& r : rows)
        if (r.margin < 0.0 || r.restricted_margin < 0.0) return kExitNo;
    return kExitYes;
}

int cmd_rank_drop(const std::string& spec_path, const std::string& out_path,
                  const SweepOverrides& ov) {
    prony::RankDropSpec spec = prony::parse_rank_drop_spec(prony::load_json_file(spec_path));
    if (ov.signals_per_cell) spec.signals_per_cell = *ov.signals_per_cell;
    if (ov.seed) spec.seed = *ov.seed;
    std::ofstream file;
    prony::write_rank_drop_csv(prony::run_rank_drop(spec), open_output(file, out_path));
    return kExitYes;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spike-train moment experiments: Prony inversion, exact low-rank "
                 "fitting geometry and certified moment-distance lower bounds"};
    app.require_subcommand(1);

    // moments
    std::string signal_path;
    long count = 0;
    auto* moments_cmd = app.add_subcommand("moments", "Print the moment vector of a signal");
    moments_cmd->add_option("signal", signal_path, "Signal JSON file")->required();
    moments_cmd->add_option("--count", count, "Number of moments (default 2d-1)");

    // sigma check / sigma sample
    auto* sigma_cmd = app.add_subcommand("sigma", "Exact low-rank fitting set");
    sigma_cmd->require_subcommand(1);
    std::string sigma_signal;
    double tolerance = 1e-9;
    auto* check_cmd = sigma_cmd->add_subcommand(
        "check", "Decide whether a single-node signal matches the first three moments");
    check_cmd->add_option("signal", sigma_signal, "Signal JSON file")->required();
    check_cmd->add_option("--tolerance", tolerance, "Relative decision tolerance");

    std::vector<double> sample_nodes, sample_u;
    int branch = 1;
    double lambda = 1.0;
    auto* sample_cmd =
        sigma_cmd->add_subcommand("sample", "Sample an amplitude vector from one branch");
    sample_cmd->add_option("--nodes", sample_nodes, "Node positions")->required()->expected(-2);
    sample_cmd->add_option("--branch", branch, "Branch, 1 or 2")->required();
    sample_cmd->add_option("--lambda", lambda, "Nonzero scale factor");
    sample_cmd->add_option("--u", sample_u, "d-2 complement coefficients (default zeros)");

    // bound sweep
    auto* bound_cmd = app.add_subcommand("bound", "Moment-distance lower bounds");
    bound_cmd->require_subcommand(1);
    std::string sweep_spec, sweep_out;
    SweepOverrides sweep_ov;
    int ov_restarts = 0, ov_signals = 0;
    std::uint64_t ov_seed = 0;
    auto* sweep_cmd = bound_cmd->add_subcommand(
        "sweep", "Certificates vs. search oracle over a parameter grid, CSV output");
    sweep_cmd->add_option("spec", sweep_spec, "Sweep spec JSON file")->required();
    sweep_cmd->add_option("-o,--out", sweep_out, "CSV output path (default stdout)");
    auto* opt_restarts = sweep_cmd->add_option("--restarts", ov_restarts, "Override restarts");
    auto* opt_signals =
        sweep_cmd->add_option("--signals-per-cell", ov_signals, "Override signals per cell");
    auto* opt_seed = sweep_cmd->add_option("--seed", ov_seed, "Override base seed");

    // rank-drop
    std::string rank_spec, rank_out;
    std::uint64_t rank_seed = 0;
    int rank_signals = 0;
    auto* rank_cmd = app.add_subcommand(
        "rank-drop", "Numerical rank of noisy cluster Hankel matrices, CSV output");
    rank_cmd->add_option("spec", rank_spec, "Rank-drop spec JSON file")->required();
    rank_cmd->add_option("-o,--out", rank_out, "CSV output path (default stdout)");
    auto* rank_opt_seed = rank_cmd->add_option("--seed", rank_seed, "Override base seed");
    auto* rank_opt_signals =
        rank_cmd->add_option("--signals-per-cell", rank_signals, "Override signals per cell");

    // prony solve
    auto* prony_cmd = app.add_subcommand("prony", "Classical Prony inversion");
    prony_cmd->require_subcommand(1);
    std::string moments_path;
    long target_nodes = 0;
    auto* solve_cmd =
        prony_cmd->add_subcommand("solve", "Recover an l-node signal from 2l moments");
    solve_cmd->add_option("moments", moments_path, "Moment JSON file (plain array)")->required();
    solve_cmd->add_option("--nodes", target_nodes, "Node count l")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitYes : kExitError;
    }

    try {
        if (*moments_cmd) return cmd_moments(signal_path, count);
        if (*check_cmd) return cmd_sigma_check(sigma_signal, tolerance);
        if (*sample_cmd) return cmd_sigma_sample(sample_nodes, branch, lambda, sample_u);
        if (*sweep_cmd) {
            if (*opt_restarts) sweep_ov.restarts = ov_restarts;
            if (*opt_signals) sweep_ov.signals_per_cell = ov_signals;
            if (*opt_seed) sweep_ov.seed = ov_seed;
            return cmd_bound_sweep(sweep_spec, sweep_out, sweep_ov);
        }
        if (*rank_cmd) {
            SweepOverrides ov;
            if (*rank_opt_seed) ov.seed = rank_seed;
            if (*rank_opt_signals) ov.signals_per_cell = rank_signals;
            return cmd_rank_drop(rank_spec, rank_out, ov);
        }
        if (*solve_cmd) return cmd_prony_solve(moments_path, target_nodes);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
