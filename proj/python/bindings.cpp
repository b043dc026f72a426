#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eigenmax/cli.hpp"
#include "eigenmax/conformal.hpp"
#include "eigenmax/eigenmap.hpp"
#include "eigenmax/error.hpp"
#include "eigenmax/fem.hpp"
#include "eigenmax/gl.hpp"
#include "eigenmax/mesh.hpp"
#include "eigenmax/taxonomy.hpp"

namespace py = pybind11;
using namespace eigenmax;

namespace {

// Structured results cross the boundary as JSON text; the Python layer decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

ProblemKind kind_of(const std::string& s) {
  if (s == "laplace") return ProblemKind::Laplace;
  if (s == "steklov") return ProblemKind::Steklov;
  throw Error(ErrorCode::ParseError, "unknown kind '" + s + "'");
}

Eigen::MatrixXd positions(const SymmetricMesh& m) {
  Eigen::MatrixXd p(m.num_vertices(), 3);
  for (int v = 0; v < m.num_vertices(); ++v) p.row(v) = m.positions[v].transpose();
  return p;
}

Eigen::MatrixXi triangles(const SymmetricMesh& m) {
  Eigen::MatrixXi t(m.num_triangles(), 3);
  for (int i = 0; i < m.num_triangles(); ++i) t.row(i) << m.triangles[i][0], m.triangles[i][1], m.triangles[i][2];
  return t;
}

Spectrum solve(const SymmetricMesh& m, const std::string& kind, int count, const std::string& bc, std::uint64_t seed) {
  SolverOptions opts;
  opts.seed = seed;
  if (!bc.empty()) return mixed_spectrum(m, BoundaryConditionMap::parse(bc), count, opts);
  return kind_of(kind) == ProblemKind::Laplace ? laplace_spectrum(m, count, opts) : steklov_spectrum(m, count, opts);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Native core of eigenmax";

  static py::exception<Error> error(mod, "EigenmaxError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<SymmetricMesh>(mod, "Mesh")
      .def_property_readonly("num_vertices", &SymmetricMesh::num_vertices)
      .def_property_readonly("num_triangles", &SymmetricMesh::num_triangles)
      .def_property_readonly("positions", &positions)
      .def_property_readonly("triangles", &triangles)
      .def_property_readonly("density", [](const SymmetricMesh& m) { return m.density; })
      .def_property_readonly("group_order", [](const SymmetricMesh& m) { return m.action.size(); })
      .def_property_readonly("generators", [](const SymmetricMesh& m) { return m.action.generator_names; })
      .def("with_density", &set_density, py::arg("density"))
      .def("area", [](const SymmetricMesh& m) { return area(m); })
      .def("euler_characteristic", [](const SymmetricMesh& m) { return euler_characteristic(m); })
      .def("to_json", [](const SymmetricMesh& m) { return dump(mesh_to_json(m)); });

  mod.def("builtin", &builtin, py::arg("spec"));
  mod.def(
      "descriptor_mesh",
      [](const std::string& descriptor, int vertices) {
        return descriptor_mesh(descriptor_from_json(nlohmann::json::parse(descriptor)), vertices);
      },
      py::arg("descriptor"), py::arg("vertices"));
  mod.def(
      "mesh_from_json", [](const std::string& s) { return mesh_from_json(nlohmann::json::parse(s)); }, py::arg("text"));

  mod.def(
      "validate_species",
      [](const std::string& species) {
        const Species s = species_from_json(nlohmann::json::parse(species));
        const SpeciesReport r = validate_species(s);
        return dump({{"valid", r.valid}, {"violations", r.violations}, {"euler_characteristic", euler_char(s)}});
      },
      py::arg("species"));
  mod.def(
      "descriptor_genus",
      [](const std::string& descriptor) { return descriptor_from_json(nlohmann::json::parse(descriptor)).genus(); },
      py::arg("descriptor"));
  mod.def(
      "degeneration_dag",
      [](const std::string& descriptor, int depth, bool all_cases) {
        const auto d = descriptor_from_json(nlohmann::json::parse(descriptor));
        return dump(degeneration_dag(d, depth, all_cases ? DegenerationMode::AllCases : DegenerationMode::Elementary)
                        .to_json());
      },
      py::arg("descriptor"), py::arg("depth") = 1, py::arg("all_cases") = false);

  mod.def(
      "spectrum",
      [](const SymmetricMesh& m, const std::string& kind, int count, const std::string& bc, std::uint64_t seed) {
        const Spectrum sp = solve(m, kind, count, bc, seed);
        return py::make_tuple(dump(sp.to_json()), sp.eigenvectors);
      },
      py::arg("mesh"), py::arg("kind") = "laplace", py::arg("count") = 10, py::arg("bc") = "", py::arg("seed") = 1);

  mod.def(
      "maximize",
      [](const SymmetricMesh& m, const std::string& kind, double tol, int max_iters, std::uint64_t seed) {
        OptimizerOptions opts;
        opts.tol = tol;
        opts.max_iters = max_iters;
        opts.solver.seed = seed;
        opts.guard = brs_guard(m);
        const OptimizationState st = maximize(m, kind_of(kind), opts);
        nlohmann::json j = st.to_json();
        j["density"] = st.density;
        return dump(j);
      },
      py::arg("mesh"), py::arg("kind") = "laplace", py::arg("tol") = 5e-3, py::arg("max_iters") = 60,
      py::arg("seed") = 1);

  mod.def(
      "structure_report",
      [](const SymmetricMesh& m, const std::string& kind, const std::string& involution, int count, int genus) {
        return dump(structure_report(m, solve(m, kind, count, "", 1), involution, genus).to_json());
      },
      py::arg("mesh"), py::arg("kind") = "laplace", py::arg("involution") = "", py::arg("count") = 10,
      py::arg("genus") = -1);
  mod.def(
      "nodal_domain_count", [](const Eigen::VectorXd& u, const SymmetricMesh& m) { return nodal_domain_count(u, m); },
      py::arg("values"), py::arg("mesh"));

  mod.def(
      "gl_energy",
      [](const SymmetricMesh& m, const Eigen::MatrixXd& u, double eps, bool free_boundary) {
        GLState s;
        s.u = u;
        s.eps = eps;
        s.target = free_boundary ? GLTarget::FreeBoundary : GLTarget::Closed;
        return energy(s, m);
      },
      py::arg("mesh"), py::arg("u"), py::arg("eps"), py::arg("free_boundary") = false);
  mod.def(
      "gl_descent",
      [](const SymmetricMesh& m, const Eigen::MatrixXd& u, double eps, bool free_boundary, int max_iters) {
        GLState s;
        s.u = u;
        s.eps = eps;
        s.target = free_boundary ? GLTarget::FreeBoundary : GLTarget::Closed;
        s.rep = fitted_representation(m, u, gl_weights(m, s.target));
        GLDescentOptions opts;
        opts.max_iters = max_iters;
        const GLDescentResult r = gl_descent(s, m, opts);
        return py::make_tuple(r.state.u, energy(r.state, m), gl_residual(r.state, m), r.converged);
      },
      py::arg("mesh"), py::arg("u"), py::arg("eps"), py::arg("free_boundary") = false, py::arg("max_iters") = 200);

  mod.def(
      "run_command",
      [](const std::string& command, const std::string& source, const std::string& config) {
        const nlohmann::json j = nlohmann::json::parse(config);
        RunConfig c;
        c.command = command;
        c.source = source;
        c.resolution = j.value("resolution", c.resolution);
        c.kind = j.value("kind", c.kind);
        c.bc = j.value("bc", c.bc);
        c.count = j.value("count", c.count);
        c.tol = j.value("tol", c.tol);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.seed = j.value("seed", c.seed);
        c.out = j.value("out", c.out);
        c.depth = j.value("depth", c.depth);
        c.mode = j.value("mode", c.mode);
        c.gap = j.value("gap", c.gap);
        CommandResult r;
        if (command == "classify")
          r = cmd_classify(c);
        else if (command == "degenerations")
          r = cmd_degenerations(c);
        else if (command == "spectrum")
          r = cmd_spectrum(c);
        else if (command == "optimize")
          r = cmd_optimize(c);
        else if (command == "verify")
          r = cmd_verify(c);
        else
          throw Error(ErrorCode::ParseError, "unknown command '" + command + "'");
        return py::make_tuple(r.exit_code, dump(r.report));
      },
      py::arg("command"), py::arg("source"), py::arg("config") = "{}");

  mod.def("set_max_jobs", &set_max_jobs, py::arg("jobs"));
}
