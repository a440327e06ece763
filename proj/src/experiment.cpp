#include "ctstokes/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace ctstokes {

int ExperimentConfig::steps_for(double dt) const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const double ratio = horizon / dt;
    const int n = static_cast<int>(std::llround(ratio));
    if (n < 1 || std::abs(n * dt - horizon) > 1e-9 * horizon)
        throw ConfigError("T must be an integer multiple of dt (T = " + std::to_string(horizon) +
                          ", dt = " + std::to_string(dt) + ")");
    return n;
}

void ExperimentConfig::validate() const {
    if (!(rect.xmin < rect.xmax) || !(rect.ymin < rect.ymax)) throw ConfigError("degenerate domain rectangle");
    if (nx < 1 || ny < 1) throw ConfigError("nx and ny must be >= 1");
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (!(horizon > 0.0)) throw ConfigError("T must be positive");
    if (dt_list.empty()) throw ConfigError("dt list must not be empty");
    for (double dt : dt_list) steps_for(dt);
    if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
    if (solver_maxit < 1) throw ConfigError("solver_maxit must be >= 1");
    if (assembly_quad_degree != 2 && assembly_quad_degree != 4 && assembly_quad_degree != 6)
        throw ConfigError("assembly_quad_degree must be 2, 4 or 6");
    if (error_quad_degree != 2 && error_quad_degree != 4 && error_quad_degree != 6)
        throw ConfigError("error_quad_degree must be 2, 4 or 6");
    if (time_gauss_points < 1 || time_gauss_points > 5) throw ConfigError("time_gauss_points must be in 1..5");
    if (checkpoint_stride < 1) throw ConfigError("checkpoint_stride must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid value for '" + key + "': " + value);
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid value for '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid value for '" + key + "': " + value + " (expected true/false)");
}

std::vector<double> parse_dt_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("empty dt list");
    return out;
}

void format_value(char* buf, size_t size, double v) {
    if (std::isnan(v)) {
        std::snprintf(buf, size, "nan");
    } else if (std::isinf(v)) {
        std::snprintf(buf, size, v > 0 ? "inf" : "-inf");
    } else {
        std::snprintf(buf, size, "%.17g", v);
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::stringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "xmin") config.rect.xmin = parse_double(key, value);
        else if (key == "xmax") config.rect.xmax = parse_double(key, value);
        else if (key == "ymin") config.rect.ymin = parse_double(key, value);
        else if (key == "ymax") config.rect.ymax = parse_double(key, value);
        else if (key == "nx") config.nx = parse_int(key, value);
        else if (key == "ny") config.ny = parse_int(key, value);
        else if (key == "mu") config.mu = parse_double(key, value);
        else if (key == "lambda") config.lambda = parse_double(key, value);
        else if (key == "T") config.horizon = parse_double(key, value);
        else if (key == "dt_list" || key == "dt") config.dt_list = parse_dt_list(key, value);
        else if (key == "include_linf_term") config.include_linf_term = parse_bool(key, value);
        else if (key == "assembly_quad_degree") config.assembly_quad_degree = parse_int(key, value);
        else if (key == "error_quad_degree") config.error_quad_degree = parse_int(key, value);
        else if (key == "time_gauss_points") config.time_gauss_points = parse_int(key, value);
        else if (key == "solver_tol") config.solver_tol = parse_double(key, value);
        else if (key == "solver_maxit") config.solver_maxit = parse_int(key, value);
        else if (key == "checkpoint_stride") config.checkpoint_stride = parse_int(key, value);
        else if (key == "threads") config.threads = parse_int(key, value);
        else if (key == "timing") config.timing = parse_bool(key, value);
        else if (key == "out") config.output_path = value;
        else throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line_number));
    }
    config.validate();
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

namespace {

// Deterministic parallel map over intervals: results land by index, the
// ledger fold afterwards is sequential and ordered.
std::vector<IntervalTerms> compute_all_interval_terms(const IntervalEvaluator& evaluator,
                                                      const SchemeTrajectory& traj, int num_threads) {
    const int n = traj.num_steps();
    std::vector<IntervalTerms> terms(n);
    int workers = num_threads > 0 ? num_threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) terms[i] = evaluator.evaluate(traj, i);
        return terms;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&]() {
        try {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) terms[i] = evaluator.evaluate(traj, i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return terms;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const ExperimentCallbacks& callbacks) {
    config.validate();
    const Mesh mesh = build_structured_mesh(config.rect, config.nx, config.ny);
    const FemSystem system = assemble_system(mesh, config.mu);
    const AnalyticStokes exact{config.lambda, config.mu};
    const AveragedLoadAssembler loads(system, exact, config.assembly_quad_degree);

    EstimatorOptions est_opts;
    est_opts.error_quad_degree = config.error_quad_degree;
    est_opts.time_gauss_points = config.time_gauss_points;
    est_opts.solver_tol = config.solver_tol;
    est_opts.solver_maxit = config.solver_maxit;
    const IntervalEvaluator evaluator(system, exact, est_opts);

    std::vector<ResultRow> rows;
    for (const double dt : config.dt_list) {
        const auto start = std::chrono::steady_clock::now();
        const int num_steps = config.steps_for(dt);
        const TimeGrid grid = TimeGrid::uniform(config.horizon, num_steps);

        std::vector<double> u0 =
            interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });

        SchemeOptions scheme_opts;
        scheme_opts.solver_tol = config.solver_tol;
        scheme_opts.solver_maxit = config.solver_maxit;
        SchemeTrajectory traj;
        if (callbacks.on_step) {
            scheme_opts.on_step = [&](const StepDiagnostics& diag) { callbacks.on_step(dt, diag); };
        }
        traj = run_scheme(
            system, grid, [&](int, double t0, double step) { return loads.load(t0, step); }, std::move(u0),
            scheme_opts);

        const std::vector<IntervalTerms> terms = compute_all_interval_terms(evaluator, traj, config.threads);

        EstimatorLedger ledger(config.include_linf_term);
        std::vector<ResultRow> run_rows;
        for (int n = 0; n < num_steps; ++n) {
            ledger.accumulate(terms[n], n, grid.t[n + 1]);
            const LedgerRow& lrow = ledger.back();
            if (lrow.checkpoint % config.checkpoint_stride != 0 && n + 1 != num_steps) continue;
            ResultRow row;
            row.lambda = config.lambda;
            row.dt = dt;
            row.t_checkpoint = lrow.t;
            row.est1 = lrow.est1;
            row.est2 = lrow.est2;
            row.est3 = lrow.est3;
            row.linf_term = lrow.linf_term;
            row.error_grad_sq = lrow.error_grad_sq;
            row.error_dual_sq = lrow.error_dual_sq;
            row.error_total = lrow.error_total;
            row.data_osc = lrow.data_osc;
            row.eff1 = lrow.eff1;
            row.eff2 = lrow.eff2;
            row.eff3 = lrow.eff3;
            run_rows.push_back(row);
        }
        if (config.timing) {
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            for (auto& row : run_rows) row.wallclock_seconds = elapsed;
        }
        rows.insert(rows.end(), run_rows.begin(), run_rows.end());
        if (callbacks.on_run_done) callbacks.on_run_done(dt, run_rows);
    }
    return rows;
}

std::string csv_header() {
    return "lambda,dt,T_checkpoint,est1,est2,est3,linf_term,error_grad_sq,error_dual_sq,error_total,data_osc,"
           "eff1,eff2,eff3,wallclock_seconds";
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << csv_header() << "\n";
    char buf[40];
    for (const auto& row : rows) {
        const double fields[] = {row.lambda,         row.dt,   row.t_checkpoint, row.est1,
                                 row.est2,           row.est3, row.linf_term,    row.error_grad_sq,
                                 row.error_dual_sq,  row.error_total, row.data_osc, row.eff1,
                                 row.eff2,           row.eff3, row.wallclock_seconds};
        for (size_t i = 0; i < std::size(fields); ++i) {
            format_value(buf, sizeof buf, fields[i]);
            out << buf << (i + 1 < std::size(fields) ? "," : "\n");
        }
    }
}

void write_csv_file(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_csv(rows, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_gnuplot_eff2(const std::vector<ResultRow>& rows, std::ostream& out) {
    char buf[40];
    double current_dt = std::numeric_limits<double>::quiet_NaN();
    bool first = true;
    for (const auto& row : rows) {
        if (row.dt != current_dt) {
            if (!first) out << "\n\n";  // gnuplot index separator
            first = false;
            current_dt = row.dt;
            format_value(buf, sizeof buf, row.dt);
            out << "# dt = " << buf << "\n";
        }
        format_value(buf, sizeof buf, row.t_checkpoint);
        out << buf << " ";
        format_value(buf, sizeof buf, row.eff2);
        out << buf << "\n";
    }
}

void write_gnuplot_eff2_file(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_gnuplot_eff2(rows, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ctstokes
