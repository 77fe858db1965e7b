#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvature.hpp"
#include "existence.hpp"
#include "flows.hpp"
#include "graph.hpp"
#include "operators.hpp"

namespace calabi_graph::io {

/// Shortest decimal that round-trips the double.
inline std::string format_double(double x) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

/// One number per line; blank lines and '#' comments are ignored.
inline std::vector<double> read_numbers(std::istream& in) {
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        for (std::string tok; fields >> tok;) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw GraphError("'" + tok + "' is not a number", line_no);
            out.push_back(v);
        }
    }
    return out;
}

inline std::vector<double> read_numbers_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open " + path);
    return read_numbers(in);
}

inline WeightedGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& ex) {
            throw GraphError(std::string("malformed graph JSON: ") + ex.what());
        }
        return graph_from_json(j);
    }
    return parse_edge_list(in);
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------
// Curvature tables: edge, u, v, weight, kappa
// ---------------------------------------------------------------------------

inline void write_curvature_csv(std::ostream& out, const WeightedGraph& g, const LogWeights& r,
                                const CurvatureVector& kappa) {
    const Vector w = r.weights();
    out << "edge,u,v,weight,kappa\n";
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        const auto ii = static_cast<Eigen::Index>(i);
        out << i << ',' << g.labels()[e.u] << ',' << g.labels()[e.v] << ',' << format_double(w[ii]) << ','
            << format_double(kappa[ii]) << '\n';
    }
}

inline nlohmann::json curvature_json(const WeightedGraph& g, const LogWeights& r, const CurvatureVector& kappa) {
    const Vector w = r.weights();
    nlohmann::json edges = nlohmann::json::array();
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        const auto ii = static_cast<Eigen::Index>(i);
        edges.push_back({{"edge", i}, {"u", g.labels()[e.u]}, {"v", g.labels()[e.v]}, {"weight", w[ii]},
                         {"kappa", kappa[ii]}});
    }
    return {{"edges", std::move(edges)},
            {"average_curvature", average_curvature(g)},
            {"gauss_bonnet_residual", gauss_bonnet_residual(g, kappa)}};
}

// ---------------------------------------------------------------------------
// Matrices and spectra
// ---------------------------------------------------------------------------

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

inline nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json spectrum_json(const Spectrum& sp, bool with_basis) {
    nlohmann::json j = {{"eigenvalues", to_list(sp.eigenvalues)}, {"raw_min_eigenvalue", sp.raw_min}};
    if (with_basis) j["eigenvectors"] = matrix_json(sp.eigenvectors);
    return j;
}

// ---------------------------------------------------------------------------
// Flow trajectories and summaries
// ---------------------------------------------------------------------------

/// Header: t, r_1..r_n, kappa_1..kappa_n, energy, sum_r, dissipation.
inline std::vector<std::string> trajectory_columns(std::size_t n) {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 1; i <= n; ++i) cols.push_back("r_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) cols.push_back("kappa_" + std::to_string(i));
    cols.insert(cols.end(), {"energy", "sum_r", "dissipation"});
    return cols;
}

inline void write_trajectory_csv(std::ostream& out, const FlowRun& run) {
    const std::size_t n = static_cast<std::size_t>(run.target.size());
    const auto cols = trajectory_columns(n);
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const auto& s : run.samples) {
        out << format_double(s.t);
        for (Eigen::Index i = 0; i < s.r.size(); ++i) out << ',' << format_double(s.r[i]);
        for (Eigen::Index i = 0; i < s.kappa.size(); ++i) out << ',' << format_double(s.kappa[i]);
        out << ',' << format_double(s.energy) << ',' << format_double(s.sum_r) << ','
            << format_double(s.dissipation) << '\n';
    }
}

inline nlohmann::json kind_json(const FlowKind& k) {
    nlohmann::json j = {{"flow", k.name()}};
    if (k.type == FlowKind::Type::Fractional) j["s"] = k.s;
    if (k.type == FlowKind::Type::PTh) j["p"] = k.p;
    if (k.type == FlowKind::Type::Ricci) {
        j["ricci_sign"] = k.ricci_sign == RicciSign::Gradient ? "gradient" : "paper-literal";
    }
    return j;
}

inline nlohmann::json invariants_json(const InvariantReport& rep) {
    return {{"points", rep.points},
            {"asserted", rep.asserted},
            {"max_sum_r_drift", rep.max_sum_drift},
            {"max_energy_increase", rep.max_energy_increase},
            {"max_potential_increase", rep.max_potential_increase},
            {"max_dissipation", rep.max_dissipation}};
}

inline nlohmann::json config_json(const FlowConfig& cfg) {
    nlohmann::json j = kind_json(cfg.kind);
    j["target"] = std::holds_alternative<ConstantAverage>(cfg.target)
                      ? nlohmann::json("constant")
                      : nlohmann::json(to_list(std::get<CurvatureVector>(cfg.target)));
    j["t_max"] = cfg.t_max;
    j["rtol"] = cfg.rtol;
    j["atol"] = cfg.atol;
    j["convergence_tol"] = cfg.convergence_tol;
    j["record_every"] = cfg.record_every;
    j["max_steps"] = cfg.max_steps;
    j["rank_eps"] = cfg.spectral.rank_eps;
    j["r0"] = to_list(cfg.r0.values());
    return j;
}

inline nlohmann::json summary_json(const FlowRun& run, const FlowConfig& cfg) {
    nlohmann::json j;
    j["status"] = to_string(run.status);
    if (run.status == FlowStatus::Aborted) j["abort_reason"] = run.abort_reason;
    j["t_final"] = run.t_final;
    j["rate_estimate"] = run.rate_estimate ? nlohmann::json(*run.rate_estimate) : nlohmann::json(nullptr);
    j["final_residual"] = run.final_residual();
    j["r_final"] = to_list(run.r_final.values());
    j["kappa_final"] = to_list(run.kappa_final);
    j["target"] = to_list(run.target);
    j["accepted_steps"] = run.accepted_steps;
    j["rejected_steps"] = run.rejected_steps;
    j["rhs_evaluations"] = run.rhs_evaluations;
    j["invariants"] = {{"samples", invariants_json(monitor_invariants(run))},
                       {"steps", invariants_json(run.step_invariants)}};
    j["config"] = config_json(cfg);
    return j;
}

}  // namespace calabi_graph::io
