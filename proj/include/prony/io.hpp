#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prony/bounds.hpp"
#include "prony/search.hpp"
#include "prony/sigma.hpp"
#include "prony/signal.hpp"

namespace prony {

// All numeric output carries 17 significant digits, enough to round-trip a
// double exactly.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string json_array(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s + "]";
}

inline std::string json_array(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

inline std::string signal_to_json(const Signal& f) {
    return "{\"amplitudes\": " + json_array(f.amplitudes)
         + ", \"nodes\": " + json_array(f.nodes) + "}";
}

inline std::string matrix_to_json(const Eigen::MatrixXd& m) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) s += ", ";
        s += "[";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ", ";
            s += format_double(m(i, j));
        }
        s += "]";
    }
    return s + "]";
}

inline std::string minor_report_to_json(const MinorReport& r) {
    std::ostringstream os;
    os << "{\"order\": " << r.order
       << ", \"value\": " << format_double(r.value)
       << ", \"row_indices\": " << json_array(r.row_indices)
       << ", \"col_indices\": " << json_array(r.col_indices)
       << ", \"delta\": " << format_double(r.delta) << "}";
    return os.str();
}

inline const char* sigma_case_name(SigmaCase c) {
    switch (c) {
        case SigmaCase::case_i: return "I";
        case SigmaCase::case_ii: return "II";
        default: return "none";
    }
}

inline std::string sigma_certificate_to_json(const SigmaCertificate& c) {
    std::ostringstream os;
    os << "{\"member\": " << (c.member ? "true" : "false")
       << ", \"case\": \"" << sigma_case_name(c.case_tag) << "\""
       << ", \"witness\": " << (c.witness ? signal_to_json(*c.witness) : std::string("null"))
       << ", \"quad_value\": " << format_double(c.quad_value)
       << ", \"moment_gaps\": [" << format_double(c.moment_gaps[0]) << ", "
       << format_double(c.moment_gaps[1]) << ", " << format_double(c.moment_gaps[2])
       << "]}";
    return os.str();
}

inline std::string bound_certificate_to_json(const BoundCertificate& c) {
    std::ostringstream os;
    os << "{\"d\": " << c.d << ", \"l\": " << c.l
       << ", \"delta\": " << format_double(c.delta)
       << ", \"zeta\": " << format_double(c.zeta)
       << ", \"theta\": " << format_double(c.theta)
       << ", \"restricted\": " << (c.restricted ? "true" : "false")
       << ", \"box_radius\": " << format_double(c.box_radius)
       << ", \"minor\": " << (c.minor ? minor_report_to_json(*c.minor) : std::string("null"))
       << "}";
    return os.str();
}

inline std::string cluster_certificate_to_json(const ClusterCertificate& c) {
    std::ostringstream os;
    os << "{\"base\": " << bound_certificate_to_json(c.base)
       << ", \"h\": " << format_double(c.h)
       << ", \"theta_h\": " << format_double(c.theta_h)
       << ", \"underflow\": " << (c.underflow ? "true" : "false") << "}";
    return os.str();
}

inline std::string search_config_to_json(const SearchConfig& cfg) {
    std::ostringstream os;
    os << "{\"target_nodes\": " << cfg.target_nodes
       << ", \"restarts\": " << cfg.restarts
       << ", \"max_iters\": " << cfg.max_iters
       << ", \"tol\": " << format_double(cfg.tol)
       << ", \"node_box\": " << format_double(cfg.node_box)
       << ", \"amp_box\": " << format_double(cfg.amp_box)
       << ", \"rng_seed\": " << cfg.rng_seed << "}";
    return os.str();
}

inline std::string search_result_to_json(const SearchResult& r, const SearchConfig& cfg) {
    std::ostringstream os;
    os << "{\"best\": " << signal_to_json(r.best)
       << ", \"distance\": " << format_double(r.distance)
       << ", \"certificate_theta\": " << format_double(r.certificate_theta)
       << ", \"margin\": " << format_double(r.margin)
       << ", \"converged\": " << (r.converged ? "true" : "false")
       << ", \"box_hit\": " << (r.box_hit ? "true" : "false")
       << ", \"config\": " << search_config_to_json(cfg) << "}";
    return os.str();
}

inline std::string prony_solution_to_json(const PronySolution& s) {
    return "{\"signal\": " + signal_to_json(s.signal)
         + ", \"residual\": " + format_double(s.residual) + "}";
}

// --- parsing -------------------------------------------------------------

inline std::vector<double> doubles_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array())
        throw shape_error(std::string(what) + ": expected a JSON array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number())
            throw shape_error(std::string(what) + ": expected a JSON array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline Signal signal_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("amplitudes") || !j.contains("nodes"))
        throw shape_error("signal: expected {\"amplitudes\": [...], \"nodes\": [...]}");
    return validate_signal(doubles_from_json(j["amplitudes"], "amplitudes"),
                           doubles_from_json(j["nodes"], "nodes"));
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw error("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline Signal load_signal(const std::string& path) {
    return signal_from_json(load_json_file(path));
}

inline MomentVector load_moments(const std::string& path) {
    return doubles_from_json(load_json_file(path), "moments");
}

} // namespace prony
