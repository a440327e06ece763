#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ctstokes/estimators.hpp"
#include "ctstokes/experiment.hpp"
#include "ctstokes/fem.hpp"
#include "ctstokes/manufactured.hpp"
#include "ctstokes/mesh.hpp"
#include "ctstokes/scheme.hpp"
#include "ctstokes/selftest.hpp"

namespace py = pybind11;
using namespace ctstokes;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Chorin-Temam Stokes solver with a posteriori time-error estimators";

    py::class_<Rect>(m, "Rect")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("xmin"), py::arg("xmax"), py::arg("ymin"),
             py::arg("ymax"))
        .def_readwrite("xmin", &Rect::xmin)
        .def_readwrite("xmax", &Rect::xmax)
        .def_readwrite("ymin", &Rect::ymin)
        .def_readwrite("ymax", &Rect::ymax)
        .def("area", &Rect::area);

    py::class_<MeshStatistics>(m, "MeshStatistics")
        .def_readonly("min_area", &MeshStatistics::min_area)
        .def_readonly("max_area", &MeshStatistics::max_area)
        .def_readonly("total_area", &MeshStatistics::total_area);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("num_vertices", &Mesh::num_vertices)
        .def_property_readonly("num_edges", &Mesh::num_edges)
        .def_property_readonly("num_triangles", &Mesh::num_triangles)
        .def_property_readonly("vertices",
                               [](const Mesh& mesh) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& v : mesh.vertices) out.emplace_back(v.x, v.y);
                                   return out;
                               })
        .def_property_readonly("triangles",
                               [](const Mesh& mesh) {
                                   std::vector<std::tuple<int, int, int>> out;
                                   for (const auto& t : mesh.triangles) out.emplace_back(t[0], t[1], t[2]);
                                   return out;
                               })
        .def_property_readonly("boundary_vertex_count",
                               [](const Mesh& mesh) {
                                   int count = 0;
                                   for (auto b : mesh.boundary_vertex) count += b;
                                   return count;
                               })
        .def("statistics", [](const Mesh& mesh) { return mesh_statistics(mesh); })
        .def("__repr__", [](const Mesh& mesh) {
            std::ostringstream os;
            os << "<Mesh vertices=" << mesh.num_vertices() << " edges=" << mesh.num_edges()
               << " triangles=" << mesh.num_triangles() << ">";
            return os.str();
        });

    m.def("build_structured_mesh", &build_structured_mesh, py::arg("rect"), py::arg("nx"), py::arg("ny"));

    py::class_<AnalyticStokes>(m, "AnalyticStokes")
        .def(py::init([](double lambda, double mu) { return AnalyticStokes{lambda, mu}; }), py::arg("lam") = 10.0,
             py::arg("mu") = 1.0)
        .def_readonly("lam", &AnalyticStokes::lambda)
        .def_readonly("mu", &AnalyticStokes::mu)
        .def("velocity",
             [](const AnalyticStokes& a, double t, double x, double y) {
                 const Vec2 u = a.velocity(t, {x, y});
                 return std::make_pair(u.x, u.y);
             })
        .def("divergence", [](const AnalyticStokes& a, double t, double x, double y) {
            return a.divergence(t, {x, y});
        })
        .def("pressure", [](const AnalyticStokes& a, double t, double x, double y) {
            return a.pressure(t, {x, y});
        })
        .def("forcing", [](const AnalyticStokes& a, double t, double x, double y) {
            const Vec2 f = a.forcing(t, {x, y});
            return std::make_pair(f.x, f.y);
        });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("rect", &ExperimentConfig::rect)
        .def_readwrite("nx", &ExperimentConfig::nx)
        .def_readwrite("ny", &ExperimentConfig::ny)
        .def_readwrite("mu", &ExperimentConfig::mu)
        .def_readwrite("lam", &ExperimentConfig::lambda)
        .def_readwrite("T", &ExperimentConfig::horizon)
        .def_readwrite("dt_list", &ExperimentConfig::dt_list)
        .def_readwrite("include_linf_term", &ExperimentConfig::include_linf_term)
        .def_readwrite("time_gauss_points", &ExperimentConfig::time_gauss_points)
        .def_readwrite("solver_tol", &ExperimentConfig::solver_tol)
        .def_readwrite("solver_maxit", &ExperimentConfig::solver_maxit)
        .def_readwrite("checkpoint_stride", &ExperimentConfig::checkpoint_stride)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("timing", &ExperimentConfig::timing)
        .def_readwrite("output_path", &ExperimentConfig::output_path)
        .def("validate", &ExperimentConfig::validate)
        .def("steps_for", &ExperimentConfig::steps_for, py::arg("dt"));

    m.def("parse_config_text", &parse_config_text, py::arg("text"));
    m.def("parse_config_file", &parse_config_file, py::arg("path"));

    py::class_<ResultRow>(m, "ResultRow")
        .def_readonly("lam", &ResultRow::lambda)
        .def_readonly("dt", &ResultRow::dt)
        .def_readonly("t_checkpoint", &ResultRow::t_checkpoint)
        .def_readonly("est1", &ResultRow::est1)
        .def_readonly("est2", &ResultRow::est2)
        .def_readonly("est3", &ResultRow::est3)
        .def_readonly("linf_term", &ResultRow::linf_term)
        .def_readonly("error_grad_sq", &ResultRow::error_grad_sq)
        .def_readonly("error_dual_sq", &ResultRow::error_dual_sq)
        .def_readonly("error_total", &ResultRow::error_total)
        .def_readonly("data_osc", &ResultRow::data_osc)
        .def_readonly("eff1", &ResultRow::eff1)
        .def_readonly("eff2", &ResultRow::eff2)
        .def_readonly("eff3", &ResultRow::eff3)
        .def_readonly("wallclock_seconds", &ResultRow::wallclock_seconds)
        .def("__repr__", [](const ResultRow& row) {
            std::ostringstream os;
            os << "<ResultRow dt=" << row.dt << " T=" << row.t_checkpoint << " est2=" << row.est2
               << " error=" << row.error_total << ">";
            return os.str();
        });

    m.def("run_experiment", [](const ExperimentConfig& config) { return run_experiment(config); },
          py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Run the full estimator sweep; returns one ResultRow per checkpoint per dt.");

    m.def("write_csv", [](const std::vector<ResultRow>& rows, const std::string& path) {
        write_csv_file(rows, path);
    }, py::arg("rows"), py::arg("path"));
    m.def("csv_text", [](const std::vector<ResultRow>& rows) {
        std::ostringstream os;
        write_csv(rows, os);
        return os.str();
    }, py::arg("rows"));
    m.def("gnuplot_eff2_text", [](const std::vector<ResultRow>& rows) {
        std::ostringstream os;
        write_gnuplot_eff2(rows, os);
        return os.str();
    }, py::arg("rows"));

    m.def("selftest", []() {
        std::ostringstream os;
        const int failures = run_selftest(os);
        return std::make_pair(failures, os.str());
    }, py::call_guard<py::gil_scoped_release>(), "Run the oracle suite; returns (failures, report).");
}
