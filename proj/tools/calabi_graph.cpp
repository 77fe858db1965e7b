// Command-line front end: calabi_graph <subcommand> GRAPH [options]

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <calabi_graph/calabi_graph.hpp>

namespace cg = calabi_graph;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_aborted = 2;

/// Thrown for any problem with the inputs; maps to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void report_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

json girth_json(const cg::Girth& g) { return g ? json(*g) : json("infinite"); }

cg::WeightedGraph load_graph(const std::string& path) { return cg::io::read_graph_file(path); }

void ensure_admissible(const cg::WeightedGraph& g) {
    try {
        cg::require_admissible(g);
    } catch (const cg::GraphError& ex) {
        throw ValidationError(ex.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("failed writing " + path);
}

struct FlowOptions {
    std::string flow = "calabi";
    double s = 1.0;
    double p = 2.0;
    std::string ricci_sign = "gradient";
    std::string target = "constant";
    std::string init = "graph";
    std::uint64_t seed = 0;
    double t_max = 1e4;
    double tol = 1e-9;
    double rtol = 1e-8;
    double atol = 1e-10;
    double rank_eps = 1e-10;
    std::size_t record_every = 1;
    std::size_t max_steps = 5'000'000;
};

void add_flow_options(CLI::App* cmd, FlowOptions& o, bool single_kind) {
    if (single_kind) {
        cmd->add_option("--flow", o.flow, "ricci | calabi | fractional | pth")
            ->check(CLI::IsMember({"ricci", "calabi", "fractional", "pth"}))
            ->capture_default_str();
        cmd->add_option("--s", o.s, "fractional order")->capture_default_str();
        cmd->add_option("--p", o.p, "p-th flow exponent (> 1)")->capture_default_str();
        cmd->add_option("--init", o.init,
                        "graph (weights from the graph file) | random | uniform | PATH (one weight per line)")
            ->capture_default_str();
        cmd->add_option("--seed", o.seed, "seed for --init random")->capture_default_str();
    }
    cmd->add_option("--ricci-sign", o.ricci_sign, "gradient | paper-literal")
        ->check(CLI::IsMember({"gradient", "paper-literal"}))
        ->capture_default_str();
    cmd->add_option("--target", o.target, "constant | PATH (one target curvature per line)")->capture_default_str();
    cmd->add_option("--t-max", o.t_max, "integration horizon")->capture_default_str();
    cmd->add_option("--tol", o.tol, "convergence threshold on max |kappa - target|")->capture_default_str();
    cmd->add_option("--rtol", o.rtol, "relative step tolerance")->capture_default_str();
    cmd->add_option("--atol", o.atol, "absolute step tolerance")->capture_default_str();
    cmd->add_option("--rank-eps", o.rank_eps, "relative zero-eigenvalue threshold")->capture_default_str();
    cmd->add_option("--record-every", o.record_every, "keep every k-th accepted step")->capture_default_str();
    cmd->add_option("--max-steps", o.max_steps, "step budget before aborting")->capture_default_str();
}

cg::FlowKind make_kind(const std::string& flow, double s, double p, const std::string& sign) {
    try {
        if (flow == "ricci") {
            return cg::FlowKind::ricci(sign == "paper-literal" ? cg::RicciSign::PaperLiteral : cg::RicciSign::Gradient);
        }
        if (flow == "calabi") return cg::FlowKind::calabi();
        if (flow == "fractional") return cg::FlowKind::fractional(s);
        if (flow == "pth") return cg::FlowKind::pth(p);
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(ex.what());
    }
    throw ValidationError("unknown flow kind '" + flow + "'");
}

cg::LogWeights random_init(std::size_t n, std::uint64_t seed) {
    cg::CounterRng rng(seed);
    return cg::LogWeights(cg::io::to_vector(cg::generators::random_log_weights(n, -1.0, 1.0, rng)));
}

cg::LogWeights make_init(const cg::WeightedGraph& g, const std::string& init, std::uint64_t seed) {
    if (init == "graph") return cg::LogWeights::of(g);
    if (init == "uniform") return cg::LogWeights::zeros(g.edge_count());
    if (init == "random") return random_init(g.edge_count(), seed);
    const auto w = cg::io::read_numbers_file(init);
    if (w.size() != g.edge_count()) {
        throw ValidationError("initial weight file has " + std::to_string(w.size()) + " entries, graph has " +
                              std::to_string(g.edge_count()) + " edges");
    }
    for (double x : w) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("initial weights must be positive and finite");
    }
    return cg::LogWeights::from_weights(w);
}

cg::TargetSpec make_target(const cg::WeightedGraph& g, const std::string& target) {
    if (target == "constant") return cg::ConstantAverage{};
    const auto k = cg::io::read_numbers_file(target);
    const cg::CurvatureVector kv = cg::io::to_vector(k);
    try {
        cg::validate_target(g, kv);
    } catch (const std::exception& ex) {
        throw ValidationError(ex.what());
    }
    return kv;
}

cg::FlowConfig make_config(const cg::WeightedGraph& g, const FlowOptions& o, const cg::FlowKind& kind,
                           const cg::LogWeights& r0) {
    cg::FlowConfig cfg;
    cfg.kind = kind;
    cfg.target = make_target(g, o.target);
    cfg.r0 = r0;
    cfg.t_max = o.t_max;
    cfg.rtol = o.rtol;
    cfg.atol = o.atol;
    cfg.convergence_tol = o.tol;
    cfg.record_every = o.record_every;
    cfg.max_steps = o.max_steps;
    try {
        cfg.spectral = cg::SpectralTolerance(o.rank_eps);
        cfg.validate(g);
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(ex.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string& path) {
    const auto g = load_graph(path);
    const auto a = cg::audit(g);
    json out = {{"vertices", g.vertex_count()},
                {"edges", g.edge_count()},
                {"girth", girth_json(a.girth)},
                {"connected", a.connected},
                {"admissible", a.admissible}};
    if (a.admissible && g.edge_count() > 0) {
        out["gauss_bonnet_residual"] = cg::gauss_bonnet_residual(g, cg::curvature(g));
        out["average_curvature"] = cg::average_curvature(g);
    } else {
        out["gauss_bonnet_residual"] = nullptr;
        out["average_curvature"] = nullptr;
    }
    std::cout << out.dump(2) << '\n';
    return a.admissible ? exit_ok : exit_invalid;
}

int cmd_curvature(const std::string& path, const std::string& format) {
    const auto g = load_graph(path);
    ensure_admissible(g);
    const auto r = cg::LogWeights::of(g);
    const auto kappa = cg::curvature(g);
    if (format == "json") {
        std::cout << cg::io::curvature_json(g, r, kappa).dump(2) << '\n';
    } else {
        cg::io::write_curvature_csv(std::cout, g, r, kappa);
    }
    return exit_ok;
}

int cmd_jacobian(const std::string& path, const std::string& format) {
    const auto g = load_graph(path);
    ensure_admissible(g);
    const auto j = cg::jacobian(g, cg::LogWeights::of(g));
    if (format == "json") {
        std::cout << json{{"jacobian", cg::io::matrix_json(j.entries())}}.dump(2) << '\n';
    } else {
        cg::io::write_matrix_csv(std::cout, j.entries());
    }
    return exit_ok;
}

int cmd_spectrum(const std::string& path, bool eigenbasis, double rank_eps) {
    const auto g = load_graph(path);
    ensure_admissible(g);
    cg::SpectralTolerance tol;
    try {
        tol = cg::SpectralTolerance(rank_eps);
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(ex.what());
    }
    const auto j = cg::jacobian(g, cg::LogWeights::of(g));
    json out = cg::io::spectrum_json(j.spectrum(tol), eigenbasis);
    out["rank_eps"] = rank_eps;
    std::cout << out.dump(2) << '\n';
    return exit_ok;
}

int cmd_flow(const std::string& path, const FlowOptions& o, const std::string& csv_path,
             const std::string& summary_path) {
    const auto g = load_graph(path);
    ensure_admissible(g);
    const auto kind = make_kind(o.flow, o.s, o.p, o.ricci_sign);
    const auto cfg = make_config(g, o, kind, make_init(g, o.init, o.seed));
    const auto run = cg::integrate(g, cfg);

    json summary = cg::io::summary_json(run, cfg);
    summary["config"]["init"] = o.init;
    summary["config"]["seed"] = o.seed;
    const std::string text = summary.dump(2) + "\n";
    if (!summary_path.empty()) write_text(summary_path, text);
    std::cout << text;
    if (!csv_path.empty()) {
        std::ostringstream csv;
        cg::io::write_trajectory_csv(csv, run);
        write_text(csv_path, csv.str());
    }
    if (run.status == cg::FlowStatus::Aborted) {
        report_error("aborted", run.abort_reason);
        return exit_aborted;
    }
    return exit_ok;
}

int cmd_densest(const std::string& path) {
    const auto g = load_graph(path);
    if (g.vertex_count() < 2) throw ValidationError("density criterion needs at least 2 vertices");
    const auto flow_cert = cg::max_density_maxflow(g);
    json out;
    out["maxflow"] = cg::to_json(flow_cert, g);
    bool agree = true;
    if (g.vertex_count() <= cg::bruteforce_vertex_limit) {
        const auto brute = cg::max_density_bruteforce(g);
        out["bruteforce"] = cg::to_json(brute, g);
        agree = brute.exists == flow_cert.exists && brute.max_density == flow_cert.max_density;
        out["agree"] = agree;
    } else {
        out["bruteforce"] = nullptr;
        out["agree"] = nullptr;
    }
    out["exists"] = flow_cert.exists;
    std::cout << out.dump(2) << '\n';
    return agree ? exit_ok : exit_invalid;
}

std::string cell_token(double x) {
    std::string s = cg::io::format_double(x);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
        if (c == '+') c = '_';
    }
    return s;
}

std::size_t sweep_threads() {
    std::size_t n = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CALABI_GRAPH_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0) {
            throw ValidationError("CALABI_GRAPH_THREADS must be a positive integer");
        }
        n = v;
    }
    return n;
}

int cmd_sweep(const std::string& path, const FlowOptions& o, const std::vector<std::string>& flows,
              const std::vector<double>& s_list, const std::vector<double>& p_list,
              const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    const auto g = load_graph(path);
    ensure_admissible(g);

    struct Cell {
        cg::FlowKind kind;
        std::uint64_t seed;
        std::string file;
    };
    std::vector<Cell> cells;
    for (const auto& f : flows) {
        std::vector<std::pair<cg::FlowKind, std::string>> kinds;
        if (f == "fractional") {
            for (double s : s_list) kinds.emplace_back(make_kind(f, s, 2.0, o.ricci_sign), "_s" + cell_token(s));
        } else if (f == "pth") {
            for (double p : p_list) kinds.emplace_back(make_kind(f, 1.0, p, o.ricci_sign), "_p" + cell_token(p));
        } else {
            kinds.emplace_back(make_kind(f, 1.0, 2.0, o.ricci_sign), "");
        }
        for (const auto& [kind, tag] : kinds) {
            for (auto seed : seeds) {
                cells.push_back({kind, seed, f + tag + "_seed" + std::to_string(seed) + ".json"});
            }
        }
    }
    if (cells.empty()) throw ValidationError("sweep has no cells");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ValidationError("cannot create " + out_dir + ": " + ec.message());

    // Validate the shared configuration once, before any thread starts.
    (void)make_config(g, o, cells.front().kind, random_init(g.edge_count(), cells.front().seed));

    std::vector<json> index(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
            try {
                const auto& c = cells[k];
                const auto cfg = make_config(g, o, c.kind, random_init(g.edge_count(), c.seed));
                const auto run = cg::integrate(g, cfg);
                json summary = cg::io::summary_json(run, cfg);
                summary["config"]["init"] = "random";
                summary["config"]["seed"] = c.seed;
                const auto file = (std::filesystem::path(out_dir) / c.file).string();
                write_text(file, summary.dump(2) + "\n");
                json entry = cg::io::kind_json(c.kind);
                entry["seed"] = c.seed;
                entry["file"] = file;
                entry["status"] = summary["status"];
                entry["final_residual"] = summary["final_residual"];
                index[k] = std::move(entry);
            } catch (const std::exception& ex) {
                std::lock_guard lock(err_mutex);
                if (first_error.empty()) first_error = ex.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(sweep_threads(), cells.size());
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    if (!first_error.empty()) throw ValidationError(first_error);

    bool any_aborted = false;
    for (const auto& e : index) any_aborted = any_aborted || e["status"] == "Aborted";
    std::cout << json{{"cells", index}}.dump(2) << '\n';
    if (any_aborted) {
        report_error("aborted", "at least one sweep cell aborted");
        return exit_aborted;
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature, Jacobian spectra, curvature flows and density certificates on girth >= 6 graphs"};
    app.require_subcommand(1);

    std::string graph_path;
    std::string format = "csv";
    bool eigenbasis = false;
    double spectrum_eps = 1e-10;
    FlowOptions flow_opts;
    std::string csv_out, summary_out;
    FlowOptions sweep_opts;
    std::vector<std::string> sweep_flows{"calabi"};
    std::vector<double> sweep_s{0.5, 1.0, 2.0};
    std::vector<double> sweep_p{1.5, 2.0, 3.0};
    std::vector<std::uint64_t> sweep_seeds{0};
    std::string sweep_dir = "sweep";

    auto graph_arg = [&](CLI::App* cmd) {
        cmd->add_option("graph", graph_path, "edge list or .json graph")->required()->check(CLI::ExistingFile);
    };

    auto* check = app.add_subcommand("check", "audit girth and connectivity; exit 0 iff admissible");
    graph_arg(check);

    auto* curv = app.add_subcommand("curvature", "per-edge curvature table");
    graph_arg(curv);
    curv->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    auto* jac = app.add_subcommand("jacobian", "the Jacobian d kappa / d r at the graph weights");
    graph_arg(jac);
    jac->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    auto* spec = app.add_subcommand("spectrum", "eigenvalues of the Jacobian");
    graph_arg(spec);
    spec->add_flag("--eigenbasis", eigenbasis, "include the orthonormal eigenvectors");
    spec->add_option("--rank-eps", spectrum_eps, "relative zero-eigenvalue threshold")->capture_default_str();

    auto* flow = app.add_subcommand("flow", "integrate one curvature flow");
    graph_arg(flow);
    add_flow_options(flow, flow_opts, true);
    flow->add_option("--out", csv_out, "trajectory CSV path");
    flow->add_option("--summary", summary_out, "summary JSON path (also printed to stdout)");

    auto* dens = app.add_subcommand("densest", "density certificate by max-flow and by enumeration");
    graph_arg(dens);

    auto* sweep = app.add_subcommand("sweep", "flows x s x p x seeds from random initial weights, run concurrently");
    graph_arg(sweep);
    add_flow_options(sweep, sweep_opts, false);
    sweep->add_option("--flows", sweep_flows, "flow kinds")
        ->check(CLI::IsMember({"ricci", "calabi", "fractional", "pth"}))
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--s", sweep_s, "fractional orders")->delimiter(',')->capture_default_str();
    sweep->add_option("--p", sweep_p, "p-th flow exponents")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", sweep_seeds, "random-init seeds")->delimiter(',')->capture_default_str();
    sweep->add_option("--out-dir", sweep_dir, "directory for per-cell summaries")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return exit_invalid;
    }

    try {
        if (*check) return cmd_check(graph_path);
        if (*curv) return cmd_curvature(graph_path, format);
        if (*jac) return cmd_jacobian(graph_path, format);
        if (*spec) return cmd_spectrum(graph_path, eigenbasis, spectrum_eps);
        if (*flow) return cmd_flow(graph_path, flow_opts, csv_out, summary_out);
        if (*dens) return cmd_densest(graph_path);
        if (*sweep) return cmd_sweep(graph_path, sweep_opts, sweep_flows, sweep_s, sweep_p, sweep_seeds, sweep_dir);
    } catch (const ValidationError& ex) {
        report_error("validation", ex.what());
        return exit_invalid;
    } catch (const cg::GraphError& ex) {
        report_error("validation", ex.what());
        return exit_invalid;
    } catch (const std::invalid_argument& ex) {
        report_error("validation", ex.what());
        return exit_invalid;
    } catch (const std::exception& ex) {
        report_error("internal", ex.what());
        return exit_invalid;
    }
    return exit_invalid;
}
