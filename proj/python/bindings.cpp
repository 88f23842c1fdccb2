#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "degenlab/lab.hpp"

namespace py = pybind11;
using namespace degenlab;

namespace {

Region region_from(const std::vector<std::vector<double>>& parts) {
    Region r;
    for (const auto& p : parts) {
        if (p.size() == 2) r.parts.push_back(Box::interval(p[0], p[1]));
        else if (p.size() == 4) r.parts.push_back(Box::rectangle(p[0], p[1], p[2], p[3]));
        else throw py::value_error("set parts are [a, b] or [x0, x1, y0, y1]");
    }
    return r;
}

Grid grid_for(const CoefficientField& field, int n, std::optional<int> ny) {
    const Box& box = field.domain();
    if (box.dim == 1) return Grid::line(n, box.lo[0], box.hi[0]);
    return Grid::rectangle(n, ny.value_or(n), box);
}

/// A propagator together with the field that produced it.
struct Model {
    CoefficientField field;
    std::shared_ptr<Propagator> prop;

    SetMask mask(const std::vector<std::vector<double>>& parts) const {
        return SetMask::rasterize(prop->form().grid(), region_from(parts));
    }
};

py::dict distance_dict(const DistanceReport& r) {
    py::dict d;
    d["mode"] = to_string(r.mode);
    d["value"] = r.value;
    d["path_value"] = r.path_value;
    d["certificate"] = r.certificate ? py::cast(Eigen::VectorXd(*r.certificate)) : py::none();
    d["certificate_norm"] = r.certificate_norm;
    d["rescale"] = r.rescale;
    return d;
}

py::dict record_dict(const AuditRecord& r) {
    py::dict d;
    d["audit"] = r.audit;
    d["kind"] = to_string(r.kind);
    d["subject"] = r.subject;
    py::dict params;
    for (const auto& [k, v] : r.params) params[py::str(k)] = v;
    d["params"] = params;
    d["left"] = r.left;
    d["right"] = r.right;
    d["margin"] = r.margin;
    d["tolerance"] = r.tolerance;
    d["pass"] = r.pass;
    d["note"] = r.note;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Heat and wave propagators of degenerate divergence-form operators, with distance audits";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);

    m.def("c_delta", &c_delta, py::arg("x"), py::arg("delta"));

    py::class_<CoefficientField>(m, "Field")
        .def_static("constant", [](double v, double a, double b) { return CoefficientField::constant(v, Box::interval(a, b)); },
                    py::arg("value"), py::arg("a") = 0.0, py::arg("b") = 1.0)
        .def_static("degenerate",
                    [](double delta, double a, double b, double scale) {
                        return CoefficientField::degenerate(delta, Box::interval(a, b), scale);
                    },
                    py::arg("delta"), py::arg("a") = -1.0, py::arg("b") = 1.0, py::arg("scale") = 1.0)
        .def_static("sinusoid",
                    [](double mean, double amp, double freq, double phase, double a, double b) {
                        return CoefficientField::sinusoid(mean, amp, freq, phase, Box::interval(a, b));
                    },
                    py::arg("mean"), py::arg("amplitude"), py::arg("frequency") = 1.0, py::arg("phase") = 0.0,
                    py::arg("a") = 0.0, py::arg("b") = 1.0)
        .def("__call__", [](const CoefficientField& f, double x, double y) { return f(Axis::x, Point{x, y}); },
             py::arg("x"), py::arg("y") = 0.0)
        .def_property_readonly("label", &CoefficientField::label)
        .def_property_readonly("dim", &CoefficientField::dim);

    py::class_<Model>(m, "Model")
        .def(py::init([](const CoefficientField& field, int n, const std::string& boundary, double eps,
                         std::optional<int> ny) {
                 auto form = assemble_form(field, grid_for(field, n, ny), boundary_from_string(boundary), eps);
                 return Model{field, std::make_shared<Propagator>(std::move(form))};
             }),
             py::arg("field"), py::arg("n"), py::arg("boundary") = "neumann", py::arg("eps") = 0.0,
             py::arg("ny") = py::none())
        .def_property_readonly("size", [](const Model& m) { return m.prop->form().size(); })
        .def_property_readonly("h", [](const Model& m) { return m.prop->form().grid().h(); })
        .def_property_readonly("centers",
                               [](const Model& m) {
                                   const Grid& g = m.prop->form().grid();
                                   Eigen::MatrixXd c(g.size(), 2);
                                   for (int i = 0; i < g.size(); ++i) {
                                       const Point p = g.center(i);
                                       c(i, 0) = p.x;
                                       c(i, 1) = p.y;
                                   }
                                   return c;
                               })
        .def_property_readonly("volumes", [](const Model& m) { return Eigen::VectorXd(m.prop->form().volumes()); })
        .def_property_readonly("stiffness", [](const Model& m) { return Eigen::SparseMatrix<double>(m.prop->form().stiffness()); })
        .def("indicator", [](const Model& m, const std::vector<std::vector<double>>& s) { return Eigen::VectorXd(m.mask(s).indicator()); })
        .def("heat", [](const Model& m, const Eigen::VectorXd& phi, double t) { return Eigen::VectorXd(m.prop->heat(phi, t)); },
             py::arg("phi"), py::arg("t"), py::call_guard<py::gil_scoped_release>())
        .def("wave", [](const Model& m, const Eigen::VectorXd& phi, double t) { return Eigen::VectorXd(m.prop->wave(phi, t)); },
             py::arg("phi"), py::arg("t"), py::call_guard<py::gil_scoped_release>())
        .def("resolvent",
             [](const Model& m, const Eigen::VectorXd& phi, double lambda) { return Eigen::VectorXd(m.prop->resolvent(phi, lambda)); },
             py::arg("phi"), py::arg("lam"))
        .def("distance",
             [](const Model& m, const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                const std::string& mode) {
                 const DistanceMode dm = distance_mode_from_string(mode);
                 const DistanceReport r = dm == DistanceMode::riemannian
                                              ? riemannian_distance(m.field, m.prop->form().grid(), m.mask(a), m.mask(b))
                                              : set_distance(m.prop->form(), m.mask(a), m.mask(b), dm);
                 return distance_dict(r);
             },
             py::arg("a"), py::arg("b"), py::arg("mode") = "d")
        .def("leakage",
             [](const Model& m, const std::vector<std::vector<double>>& a, double t) { return leakage_norm(*m.prop, m.mask(a), t); },
             py::arg("a"), py::arg("t"), py::call_guard<py::gil_scoped_release>())
        .def("gaussian_audit",
             [](const Model& m, const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                const std::vector<double>& times) {
                 py::list out;
                 for (const AuditRecord& r : gaussian_bound_audit(*m.prop, m.mask(a), m.mask(b), times, "python"))
                     out.append(record_dict(r));
                 return out;
             },
             py::arg("a"), py::arg("b"), py::arg("times"));

    m.def("list_scenarios", [] {
        py::list out;
        for (const Scenario& s : packaged_scenarios()) out.append(py::make_tuple(s.name, s.summary));
        return out;
    });
    m.def("describe", [](const std::string& name) {
        const Scenario* s = find_scenario(name);
        if (!s) throw py::key_error(name);
        return s->yaml;
    });
    m.def("validate_config", [](const std::string& text) { return config_echo(parse_config(text, "<python>")); },
          py::arg("text"), "Parses a config and returns its JSON echo; raises ConfigError on invalid input.");
    m.def("run",
          [](const std::string& text_or_name, std::optional<int> grid_override, std::optional<int> jobs,
             std::optional<std::uint64_t> seed, std::optional<std::string> out) {
              ExperimentConfig config;
              if (const Scenario* s = find_scenario(text_or_name)) config = parse_config(s->yaml, "scenario:" + s->name);
              else config = parse_config(text_or_name, "<python>");
              config = apply_overrides(std::move(config), RunOptions{grid_override, jobs, seed, out});
              RunReport report;
              {
                  py::gil_scoped_release release;
                  report = run_experiment(config);
                  if (out) write_report(report, *out);
              }
              return py::make_tuple(exit_code(report), report.json);
          },
          py::arg("config"), py::arg("grid_override") = py::none(), py::arg("jobs") = py::none(),
          py::arg("seed") = py::none(), py::arg("out") = py::none(),
          "Runs a packaged scenario name or config text; returns (exit_code, report_json).");
}
