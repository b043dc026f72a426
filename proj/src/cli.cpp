#include "eigenmax/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "eigenmax/conformal.hpp"
#include "eigenmax/eigenmap.hpp"
#include "eigenmax/error.hpp"
#include "eigenmax/fem.hpp"
#include "eigenmax/taxonomy.hpp"

namespace eigenmax {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = std::numbers::pi;
namespace fs = std::filesystem;

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

// Inline JSON when the text starts with a brace, otherwise a file path.
nlohmann::json read_json_source(const std::string& source) {
  const auto first = source.find_first_not_of(" \t\n");
  if (first != std::string::npos && source[first] == '{') {
    try {
      return nlohmann::json::parse(source);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("inline json: ") + e.what());
    }
  }
  return read_json_file(source);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) throw Error(ErrorCode::IOError, "cannot create " + cfg.out);
  return fs::path(cfg.out);
}

// Manifest with digests of the given outputs and of a file-valued source.
void write_manifest(const RunConfig& cfg, const fs::path& dir, const std::vector<std::string>& outputs) {
  nlohmann::json inputs = nlohmann::json::object();
  if (!cfg.source.empty() && fs::is_regular_file(cfg.source)) inputs[cfg.source] = file_digest(cfg.source);
  nlohmann::json outs = nlohmann::json::object();
  for (const auto& name : outputs) outs[name] = file_digest((dir / name).string());
  const nlohmann::json manifest{
      {"command", cfg.command},
      {"config", cfg.to_json()},
      {"inputs", inputs},
      {"outputs", outs},
      {"versions",
       {{"eigenmax", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                     "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_json(dir / "manifest.json", manifest);
}

bool has_level(const std::string& spec) {
  std::stringstream ss(spec);
  std::string part;
  int i = 0;
  bool level = false;
  while (std::getline(ss, part, ':')) {
    if (i++ >= 2 && !part.empty() && part.find('=') == std::string::npos) level = true;
  }
  return level;
}

SymmetricMesh builtin_at_resolution(const std::string& spec, int resolution) {
  if (has_level(spec)) return builtin(spec);
  SymmetricMesh m;
  for (int level = 0; level <= 8; ++level) {
    m = builtin(spec + ":" + std::to_string(level));
    if (m.num_vertices() >= resolution) break;
  }
  return m;
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions s;
  s.seed = cfg.seed;
  return s;
}

ProblemKind problem_kind(const RunConfig& cfg) {
  if (cfg.kind == "laplace") return ProblemKind::Laplace;
  if (cfg.kind == "steklov" || cfg.kind == "mixed") return ProblemKind::Steklov;
  throw Error(ErrorCode::ParseError, "unknown kind '" + cfg.kind + "'");
}

std::string default_involution(const SymmetricMesh& m) { return m.action.find("tau") >= 0 ? "tau" : ""; }

int genus_hint(const SymmetricMesh& m) {
  try {
    if (m.descriptor.is_object() && m.descriptor.contains("family"))
      return descriptor_from_json(m.descriptor).genus();
  } catch (const Error&) {
  }
  return -1;
}

CommandResult failure(int code, const Error& e) {
  return {code, {{"error", error_name(e.code())}, {"message", e.what()}}};
}

// Spectrum of the optimized mesh with enough eigenpairs to resolve the first cluster.
Spectrum optimized_spectrum(const SymmetricMesh& m, ProblemKind kind, int cluster, const SolverOptions& opts) {
  const int count = cluster + 5;
  return kind == ProblemKind::Laplace ? laplace_spectrum(m, count, opts) : steklov_spectrum(m, count, opts);
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  return {{"command", command}, {"source", source},     {"resolution", resolution}, {"kind", kind},
          {"bc", bc},           {"count", count},       {"tol", tol},               {"max_iters", max_iters},
          {"seed", seed},       {"depth", depth},       {"mode", mode},             {"gap", gap}};
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot read " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

SymmetricMesh load_source(const RunConfig& cfg) {
  if (cfg.source.rfind("builtin:", 0) == 0) return builtin_at_resolution(cfg.source, cfg.resolution);
  const nlohmann::json j = read_json_source(cfg.source);
  if (j.contains("family")) return descriptor_mesh(descriptor_from_json(j), cfg.resolution);
  if (j.contains("positions")) return mesh_from_json(j);
  throw Error(ErrorCode::ParseError, "source is neither a mesh nor a descriptor");
}

CommandResult cmd_classify(const RunConfig& cfg) {
  nlohmann::json j;
  try {
    j = read_json_source(cfg.source);
  } catch (const Error& e) {
    return failure(1, e);
  }
  nlohmann::json report;
  Species s;
  try {
    if (j.contains("family")) {
      const SurfaceDescriptor d = descriptor_from_json(j);
      report["descriptor"] = d.key();
      report["genus"] = d.genus();
      report["boundary_components"] = d.boundary_count();
      s = species_of(d.closed_family() ? d : double_surface(d).surface);
    } else {
      s = species_from_json(j);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) return failure(1, e);
    return {2, {{"valid", false}, {"violations", {error_name(e.code())}}, {"message", e.what()}}};
  } catch (const nlohmann::json::exception& e) {
    return failure(1, Error(ErrorCode::ParseError, e.what()));
  }
  const SpeciesReport r = validate_species(s);
  report["species"] = to_json(s);
  report["valid"] = r.valid;
  report["violations"] = r.violations;
  report["euler_characteristic"] = euler_char(s);
  report["topological_euler_characteristic"] = topological_euler_char(s);
  if (!report.contains("genus")) report["genus"] = s.genus;
  try {
    if (!cfg.out.empty()) {
      const fs::path dir = prepare_out(cfg);
      write_json(dir / "classify.json", report);
      write_manifest(cfg, dir, {"classify.json"});
    }
  } catch (const Error& e) {
    return failure(1, e);
  }
  return {r.valid ? 0 : 2, report};
}

CommandResult cmd_degenerations(const RunConfig& cfg) {
  try {
    if (cfg.depth < 0) throw Error(ErrorCode::ParseError, "depth must be nonnegative");
    DegenerationMode mode;
    if (cfg.mode == "elementary")
      mode = DegenerationMode::Elementary;
    else if (cfg.mode == "all-cases")
      mode = DegenerationMode::AllCases;
    else
      throw Error(ErrorCode::ParseError, "unknown mode '" + cfg.mode + "'");
    const SurfaceDescriptor d = descriptor_from_json(read_json_source(cfg.source));
    const DegenerationDag dag = degeneration_dag(d, cfg.depth, mode);
    nlohmann::json report = dag.to_json();
    report["dot"] = dag.to_dot();
    if (!cfg.out.empty()) {
      const fs::path dir = prepare_out(cfg);
      write_text(dir / "dag.dot", dag.to_dot());
      write_json(dir / "dag.json", dag.to_json());
      write_manifest(cfg, dir, {"dag.dot", "dag.json"});
    }
    return {0, report};
  } catch (const Error& e) {
    const bool usage = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::IOError;
    return failure(usage ? 1 : 2, e);
  } catch (const nlohmann::json::exception& e) {
    return failure(1, Error(ErrorCode::ParseError, e.what()));
  }
}

CommandResult cmd_spectrum(const RunConfig& cfg) {
  try {
    if (cfg.count <= 0) throw Error(ErrorCode::ParseError, "count must be positive");
    const SymmetricMesh m = load_source(cfg);
    const SolverOptions opts = solver_options(cfg);
    Spectrum sp;
    nlohmann::json bc_json;
    const bool mixed = cfg.kind == "mixed" || (!cfg.bc.empty() && cfg.kind != "laplace");
    if (mixed) {
      const std::string bc = cfg.bc.empty() || cfg.bc == "mixed" ? "outer=steklov,free=neumann" : cfg.bc;
      const auto map = BoundaryConditionMap::parse(bc);
      sp = mixed_spectrum(m, map, cfg.count, opts);
      bc_json = map.str();
    } else if (problem_kind(cfg) == ProblemKind::Laplace) {
      sp = laplace_spectrum(m, cfg.count, opts);
    } else {
      sp = steklov_spectrum(m, cfg.count, opts);
    }
    nlohmann::json report = sp.to_json();
    report["vertices"] = m.num_vertices();
    report["descriptor"] = m.descriptor;
    if (!bc_json.is_null()) report["bc"] = bc_json;
    if (!cfg.out.empty()) {
      const fs::path dir = prepare_out(cfg);
      write_json(dir / "spectrum.json", report);
      write_manifest(cfg, dir, {"spectrum.json"});
    }
    return {0, report};
  } catch (const Error& e) {
    return failure(1, e);
  }
}

CommandResult cmd_optimize(const RunConfig& cfg) {
  try {
    if (cfg.kind == "mixed") throw Error(ErrorCode::ParseError, "optimize supports laplace and steklov");
    const ProblemKind kind = problem_kind(cfg);
    const SymmetricMesh m = load_source(cfg);
    OptimizerOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    opts.solver.seed = cfg.seed;
    opts.guard = brs_guard(m);
    log_info("optimize: " + std::to_string(m.num_vertices()) + " vertices");
    const OptimizationState st = maximize(m, kind, opts);
    const SymmetricMesh mo = set_density(m, st.density);
    const Spectrum sp = optimized_spectrum(mo, kind, static_cast<int>(st.cluster_basis.cols()), opts.solver);
    const StructureReport sr = structure_report(mo, sp, default_involution(mo), genus_hint(mo));

    const double guard = brs_guard(mo);
    nlohmann::json report{{"descriptor", mo.descriptor},
                          {"kind", kind == ProblemKind::Laplace ? "laplace" : "steklov"},
                          {"vertices", mo.num_vertices()},
                          {"objective", st.objective},
                          {"residual", st.residual},
                          {"converged", st.converged},
                          {"stalled", st.stalled},
                          {"cluster_dimension", st.cluster_basis.cols()},
                          {"iterations", st.to_json().at("iterations")},
                          {"structure", sr.to_json()}};
    if (guard > 0) {
      bool below = true;
      for (const auto& h : st.history) below = below && h.objective < guard;
      const int max_dim = kind == ProblemKind::Laplace ? 4 : 3;
      report["guards"] = {{"bound", guard},
                          {"all_iterates_below", below},
                          {"cluster_bound", max_dim},
                          {"cluster_within_bound", static_cast<int>(st.cluster_basis.cols()) <= max_dim},
                          {"parity_within_bound", sr.parity_bounds}};
    }
    if (cfg.gap && mo.descriptor.contains("family")) {
      const SurfaceDescriptor d = descriptor_from_json(mo.descriptor);
      std::vector<GapChild> children;
      for (const auto& e : elementary_degenerations(d)) {
        const SymmetricMesh cm = descriptor_mesh(e.child, cfg.resolution);
        const OptimizationState cs = maximize(cm, kind, opts);
        children.push_back({e.child.key(), cs.objective, cm.num_vertices()});
      }
      report["gap"] = gap_report(d, st.objective, mo.num_vertices(), children).to_json();
    }

    if (!cfg.out.empty()) {
      const fs::path dir = prepare_out(cfg);
      nlohmann::json state = st.to_json();
      state["density"] = st.density;
      write_json(dir / "state.json", state);
      write_json(dir / "mesh.json", mesh_to_json(mo));
      write_obj((dir / "mesh.obj").string(), mo);
      write_json(dir / "report.json", report);
      write_manifest(cfg, dir, {"state.json", "mesh.json", "mesh.obj", "report.json"});
    }
    return {0, report};
  } catch (const Error& e) {
    return failure(e.code() == ErrorCode::ParseError || e.code() == ErrorCode::IOError ? 1 : 2, e);
  }
}

CommandResult cmd_verify(const RunConfig& cfg) {
  const fs::path dir(cfg.source);
  nlohmann::json manifest, mesh_j, state, report;
  try {
    manifest = read_json_file((dir / "manifest.json").string());
    mesh_j = read_json_file((dir / "mesh.json").string());
    state = read_json_file((dir / "state.json").string());
    report = read_json_file((dir / "report.json").string());
  } catch (const Error& e) {
    return failure(1, e);
  }
  nlohmann::json checks = nlohmann::json::array();
  bool ok = true;
  auto check = [&](const std::string& name, bool pass, nlohmann::json detail = nullptr) {
    nlohmann::json c{{"check", name}, {"pass", pass}};
    if (!detail.is_null()) c["detail"] = detail;
    checks.push_back(c);
    ok = ok && pass;
  };
  try {
    bool digests = true;
    nlohmann::json mismatched = nlohmann::json::array();
    for (const auto& [name, digest] : manifest.at("outputs").items()) {
      const fs::path p = dir / name;
      if (!fs::exists(p)) throw Error(ErrorCode::IOError, "missing " + p.string());
      if (file_digest(p.string()) != digest.get<std::string>()) {
        digests = false;
        mismatched.push_back(name);
      }
    }
    check("digests", digests, mismatched);

    SymmetricMesh m = mesh_from_json(mesh_j);
    const std::vector<double> rho = state.at("density").get<std::vector<double>>();
    const bool sized = static_cast<int>(rho.size()) == m.num_vertices();
    check("density_size", sized);
    if (!sized) return {2, {{"pass", false}, {"checks", checks}}};
    bool positive = true;
    for (double r : rho) positive = positive && std::isfinite(r) && r > 0;
    check("density_positive", positive);
    const bool invariant = density_invariant(m, rho, 1e-9) && density_invariant(m, m.density, 1e-9);
    check("density_invariant", invariant);
    bool same = rho.size() == m.density.size();
    for (std::size_t i = 0; same && i < rho.size(); ++i) same = std::abs(rho[i] - m.density[i]) <= 1e-12 * std::abs(rho[i]);
    check("density_consistent", same);
    if (!positive || !invariant) return {2, {{"pass", false}, {"checks", checks}}};

    m.density = rho;
    const ProblemKind kind = state.at("kind").get<std::string>() == "steklov" ? ProblemKind::Steklov : ProblemKind::Laplace;
    const int cluster = report.at("cluster_dimension").get<int>();
    SolverOptions opts;
    opts.seed = manifest.at("config").value("seed", std::uint64_t{1});
    const Spectrum sp = optimized_spectrum(m, kind, cluster, opts);
    const double value = sp.normalized_first(), stored = state.at("objective").get<double>();
    check("objective", std::abs(value - stored) <= 1e-6 * std::abs(stored), {{"recomputed", value}, {"stored", stored}});
    const double guard = brs_guard(m);
    if (guard > 0) {
      bool below = true;
      for (const auto& h : state.at("iterations")) below = below && h.at("objective").get<double>() < guard;
      check("brs_bound", below && value < guard, {{"bound", guard}});
      check("cluster_bound", cluster <= (kind == ProblemKind::Laplace ? 4 : 3), cluster);
    }
    const double half = kind == ProblemKind::Laplace ? 8 * kPi : 2 * kPi;
    const double area = report.at("structure").at("area").at("area").get<double>();
    check("area_bound", area < half, {{"area", area}, {"bound", half}});
    for (int n : report.at("structure").at("nodal_counts")) {
      check("nodal_count", n == 2, n);
      break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IOError || e.code() == ErrorCode::ParseError) return failure(1, e);
    check("exception", false, e.what());
  } catch (const nlohmann::json::exception& e) {
    return failure(1, Error(ErrorCode::ParseError, e.what()));
  }
  return {ok ? 0 : 2, {{"pass", ok}, {"checks", checks}}};
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Equivariant first-eigenvalue maximization on reflection surfaces"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--seed", cfg.seed, "Seed for solver starting blocks");
  app.add_option("--jobs", cfg.jobs, "Worker thread cap (0 uses all cores)");
  app.add_option("--out", cfg.out, "Output directory");

  auto* classify = app.add_subcommand("classify", "Validate a species or descriptor JSON");
  classify->add_option("source", cfg.source, "JSON file or inline JSON")->required();

  auto* degen = app.add_subcommand("degenerations", "Degeneration DAG of a descriptor");
  degen->add_option("source", cfg.source, "Descriptor JSON file or inline JSON")->required();
  degen->add_option("--depth", cfg.depth, "Maximum depth");
  degen->add_option("--mode", cfg.mode, "elementary or all-cases");

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of a mesh, builtin or descriptor");
  spectrum->add_option("source", cfg.source, "builtin:<name>, mesh or descriptor JSON")->required();
  spectrum->add_option("--resolution", cfg.resolution, "Target vertex count");
  spectrum->add_option("--kind", cfg.kind, "laplace, steklov or mixed");
  spectrum->add_option("--bc", cfg.bc, "Boundary conditions panel=cond,... or mixed");
  spectrum->add_option("--count", cfg.count, "Number of eigenpairs");

  auto* optimize = app.add_subcommand("optimize", "Maximize the normalized first eigenvalue");
  optimize->add_option("source", cfg.source, "builtin:<name>, mesh or descriptor JSON")->required();
  optimize->add_option("--resolution", cfg.resolution, "Target vertex count");
  optimize->add_option("--kind", cfg.kind, "laplace or steklov");
  optimize->add_option("--tol", cfg.tol, "Extremality residual tolerance");
  optimize->add_option("--max-iters", cfg.max_iters, "Iteration cap");
  optimize->add_flag("--gap", cfg.gap, "Optimize elementary degenerations for a gap report");

  auto* verify = app.add_subcommand("verify", "Recheck an optimize output bundle");
  verify->add_option("bundle", cfg.source, "Bundle directory")->required();

  for (auto* sub : {classify, degen, spectrum, optimize, verify}) {
    sub->add_option("--seed", cfg.seed, "Seed for solver starting blocks");
    sub->add_option("--jobs", cfg.jobs, "Worker thread cap");
    sub->add_option("--out", cfg.out, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  set_max_jobs(cfg.jobs);

  CommandResult r;
  try {
  if (*classify) {
    cfg.command = "classify";
    r = cmd_classify(cfg);
  } else if (*degen) {
    cfg.command = "degenerations";
    r = cmd_degenerations(cfg);
  } else if (*spectrum) {
    cfg.command = "spectrum";
    r = cmd_spectrum(cfg);
  } else if (*optimize) {
    cfg.command = "optimize";
    r = cmd_optimize(cfg);
  } else {
    cfg.command = "verify";
    r = cmd_verify(cfg);
  }
  } catch (const std::exception& e) {
    r = {1, {{"error", "Unexpected"}, {"message", e.what()}}};
  }
  std::cout << r.report.dump(2) << '\n';
  return r.exit_code;
}

}  // namespace eigenmax
