#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctstokes/experiment.hpp"
#include "ctstokes/mesh.hpp"
#include "ctstokes/selftest.hpp"

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int command_run(const std::string& config_path, const std::vector<std::string>& overrides, bool verbose) {
    ctstokes::ExperimentConfig config;
    try {
        if (!config_path.empty()) config = ctstokes::parse_config_file(config_path);
        // command-line overrides reuse the key=value parser
        std::string override_text;
        for (const auto& kv : overrides) override_text += kv + "\n";
        if (!override_text.empty()) {
            // parse_config_text starts from defaults, so feed the current
            // values first and let the override lines win
            std::ostringstream os;
            os << "xmin = " << config.rect.xmin << "\nxmax = " << config.rect.xmax << "\nymin = " << config.rect.ymin
               << "\nymax = " << config.rect.ymax << "\nnx = " << config.nx << "\nny = " << config.ny << "\n";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", config.mu);
            os << "mu = " << buf << "\n";
            std::snprintf(buf, sizeof buf, "%.17g", config.lambda);
            os << "lambda = " << buf << "\n";
            std::snprintf(buf, sizeof buf, "%.17g", config.horizon);
            os << "T = " << buf << "\n";
            os << "dt_list = ";
            for (size_t i = 0; i < config.dt_list.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", config.dt_list[i]);
                os << (i ? "," : "") << buf;
            }
            os << "\ninclude_linf_term = " << (config.include_linf_term ? "true" : "false") << "\n";
            os << "assembly_quad_degree = " << config.assembly_quad_degree << "\n";
            os << "error_quad_degree = " << config.error_quad_degree << "\n";
            os << "time_gauss_points = " << config.time_gauss_points << "\n";
            std::snprintf(buf, sizeof buf, "%.17g", config.solver_tol);
            os << "solver_tol = " << buf << "\n";
            os << "solver_maxit = " << config.solver_maxit << "\n";
            os << "checkpoint_stride = " << config.checkpoint_stride << "\n";
            os << "threads = " << config.threads << "\n";
            os << "timing = " << (config.timing ? "true" : "false") << "\n";
            os << "out = " << config.output_path << "\n";
            config = ctstokes::parse_config_text(os.str() + override_text);
        }
        config.validate();
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    }

    std::vector<ctstokes::ResultRow> completed;  // flushed even if a later run fails
    try {
        ctstokes::ExperimentCallbacks callbacks;
        if (verbose) {
            callbacks.on_step = [](double dt, const ctstokes::StepDiagnostics& diag) {
                std::fprintf(stderr, "dt=%g step=%d t=%.6f cg_u=%d cg_p=%d |div u|=%.3e\n", dt, diag.step, diag.t,
                             diag.velocity_solve.iterations, diag.pressure_solve.iterations, diag.div_u_norm);
            };
        }
        callbacks.on_run_done = [&](double dt, const std::vector<ctstokes::ResultRow>& rows) {
            completed.insert(completed.end(), rows.begin(), rows.end());
            if (verbose) std::fprintf(stderr, "dt=%g done, %zu checkpoint rows\n", dt, rows.size());
        };
        const std::vector<ctstokes::ResultRow> rows = ctstokes::run_experiment(config, callbacks);
        ctstokes::write_csv_file(rows, config.output_path);
        std::string companion = config.output_path;
        const auto dotpos = companion.rfind('.');
        companion = (dotpos == std::string::npos ? companion : companion.substr(0, dotpos)) + "_eff2.dat";
        ctstokes::write_gnuplot_eff2_file(rows, companion);
        std::cout << "wrote " << rows.size() << " rows to " << config.output_path << " (companion " << companion
                  << ")\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        try {
            ctstokes::write_csv_file(completed, config.output_path);
            std::cerr << "flushed " << completed.size() << " completed rows to " << config.output_path << "\n";
        } catch (const std::exception&) {
        }
        return 1;
    }
}

int command_mesh_info(int nx, int ny, const std::string& export_path) {
    try {
        const ctstokes::Mesh mesh = ctstokes::build_structured_mesh(ctstokes::Rect{}, nx, ny);
        const ctstokes::MeshStatistics stats = ctstokes::mesh_statistics(mesh);
        int boundary_vertices = 0, boundary_edges = 0;
        for (auto b : mesh.boundary_vertex) boundary_vertices += b;
        for (auto b : mesh.boundary_edge) boundary_edges += b;
        std::cout << "vertices: " << mesh.num_vertices() << "\n"
                  << "edges: " << mesh.num_edges() << "\n"
                  << "triangles: " << mesh.num_triangles() << "\n"
                  << "boundary vertices: " << boundary_vertices << "\n"
                  << "boundary edges: " << boundary_edges << "\n"
                  << "triangle area min/max: " << stats.min_area << " / " << stats.max_area << "\n"
                  << "total area: " << stats.total_area << "\n"
                  << "P2 velocity dofs: " << 2 * (mesh.num_vertices() + mesh.num_edges()) << "\n"
                  << "P1 pressure dofs: " << mesh.num_vertices() << "\n";
        if (!export_path.empty()) {
            std::ofstream out(export_path);
            if (!out) throw std::runtime_error("cannot open " + export_path);
            ctstokes::write_mesh_text(mesh, out);
        }
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chorin-Temam Stokes solver with a posteriori time-error estimators"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the estimator experiment sweep");
    std::string config_path;
    std::vector<std::string> overrides;
    bool verbose = false;
    double lambda = 0, horizon = 0;
    std::string dt_csv, out_path, include_linf;
    int nx = 0, ny = 0, stride = 0, threads = -1;
    bool timing = false;
    run->add_option("--config", config_path, "config file (key = value lines)");
    auto* opt_lambda = run->add_option("--lambda", lambda, "forcing frequency");
    auto* opt_T = run->add_option("--T", horizon, "time horizon");
    auto* opt_dt = run->add_option("--dt", dt_csv, "comma-separated dt list");
    auto* opt_nx = run->add_option("--nx", nx, "cells per side in x");
    auto* opt_ny = run->add_option("--ny", ny, "cells per side in y");
    auto* opt_linf = run->add_option("--include-linf", include_linf, "add the L-inf div term to effectivities");
    auto* opt_out = run->add_option("--out", out_path, "output CSV path");
    auto* opt_stride = run->add_option("--stride", stride, "checkpoint stride");
    auto* opt_threads = run->add_option("--threads", threads, "worker threads (0 = hardware)");
    auto* opt_timing = run->add_flag("--timing", timing, "record wallclock (nondeterministic output)");
    run->add_flag("--verbose", verbose, "per-step diagnostics on stderr");

    auto* mesh_info = app.add_subcommand("mesh-info", "print structured-mesh statistics");
    int mi_nx = 48, mi_ny = 48;
    std::string export_path;
    mesh_info->add_option("--nx", mi_nx, "cells per side in x")->required();
    mesh_info->add_option("--ny", mi_ny, "cells per side in y")->required();
    mesh_info->add_option("--export", export_path, "write plain-text mesh dump");

    auto* selftest = app.add_subcommand("selftest", "run the oracle/property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) {
        if (opt_lambda->count()) overrides.push_back("lambda = " + fmt_double(lambda));
        if (opt_T->count()) overrides.push_back("T = " + fmt_double(horizon));
        if (opt_dt->count()) overrides.push_back("dt_list = " + dt_csv);
        if (opt_nx->count()) overrides.push_back("nx = " + std::to_string(nx));
        if (opt_ny->count()) overrides.push_back("ny = " + std::to_string(ny));
        if (opt_linf->count()) overrides.push_back("include_linf_term = " + include_linf);
        if (opt_out->count()) overrides.push_back("out = " + out_path);
        if (opt_stride->count()) overrides.push_back("checkpoint_stride = " + std::to_string(stride));
        if (opt_threads->count()) overrides.push_back("threads = " + std::to_string(threads));
        if (opt_timing->count()) overrides.push_back("timing = true");
        return command_run(config_path, overrides, verbose);
    }
    if (mesh_info->parsed()) return command_mesh_info(mi_nx, mi_ny, export_path);
    if (selftest->parsed()) return ctstokes::run_selftest(std::cout) == 0 ? 0 : 1;
    return 2;
}
