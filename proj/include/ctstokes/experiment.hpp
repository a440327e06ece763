#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctstokes/estimators.hpp"
#include "ctstokes/mesh.hpp"

namespace ctstokes {

struct ExperimentConfig {
    Rect rect;  // default (-1,1)^2
    int nx = 48, ny = 48;
    double mu = 1.0;
    double lambda = 10.0;
    double horizon = 3.0;
    std::vector<double> dt_list = {0.1, 0.05, 0.025, 0.0125, 0.00625};
    bool include_linf_term = true;
    int assembly_quad_degree = 4;
    int error_quad_degree = 6;
    int time_gauss_points = 3;
    double solver_tol = 1e-10;
    int solver_maxit = 10000;
    int checkpoint_stride = 1;
    int threads = 0;      // worker threads for interval terms; 0 = hardware
    bool timing = false;  // real wallclock makes output nondeterministic
    std::string output_path = "results.csv";

    // Number of uniform steps for one dt; throws ConfigError if T/dt is not
    // a positive integer.
    int steps_for(double dt) const;
    void validate() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat "key = value" text; '#' comments; unknown keys rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct ResultRow {
    double lambda = 0.0;
    double dt = 0.0;
    double t_checkpoint = 0.0;
    double est1 = 0.0, est2 = 0.0, est3 = 0.0, linf_term = 0.0;
    double error_grad_sq = 0.0, error_dual_sq = 0.0, error_total = 0.0, data_osc = 0.0;
    double eff1 = 0.0, eff2 = 0.0, eff3 = 0.0;
    double wallclock_seconds = 0.0;
};

struct ExperimentCallbacks {
    // Per-step scheme diagnostics (step, t, CG iterations, |div u|).
    std::function<void(double dt, const StepDiagnostics&)> on_step;
    // Called with each finished dt run's rows, before the next run starts;
    // lets callers flush partial results if a later run fails.
    std::function<void(double dt, const std::vector<ResultRow>&)> on_run_done;
};

// Full sweep: assemble once, then for each dt run the scheme, accumulate the
// ledger and emit one row per checkpoint.  Deterministic given the config.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const ExperimentCallbacks& callbacks = {});

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_csv_file(const std::vector<ResultRow>& rows, const std::string& path);
// gnuplot companion: blocks of "T eff2" per dt, blank-line separated.
void write_gnuplot_eff2(const std::vector<ResultRow>& rows, std::ostream& out);
void write_gnuplot_eff2_file(const std::vector<ResultRow>& rows, const std::string& path);
std::string csv_header();

}  // namespace ctstokes
