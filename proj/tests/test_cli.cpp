#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "eigenmax/cli.hpp"

using namespace eigenmax;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

RunConfig config(const std::string& command, const std::string& source) {
  RunConfig c;
  c.command = command;
  c.source = source;
  return c;
}

const char* kSphere = R"({"family":"M","group":{"kind":"Trivial","params":[]},"b":{"f":1}})";
const char* kDisk = R"({"family":"Ntau","group":{"kind":"Trivial","params":[]},"b":{"f":1}})";
const char* kGenus6 = R"({"family":"M","group":{"kind":"1*","params":[]},"b":{"f":2,"e":{"1":3}}})";

}  // namespace

TEST_CASE("classify exit codes") {
  TempDir dir("eigenmax_cli_classify");
  const auto ok = cmd_classify(config("classify", dir.file("ok.json", R"({"genus":1,"k":0,"epsilon":"+","Cp":2})")));
  CHECK(ok.exit_code == 0);
  CHECK(ok.report["valid"].get<bool>());
  CHECK(ok.report["euler_characteristic"] == 0);
  CHECK(ok.report["genus"] == 1);

  const auto bad = cmd_classify(config("classify", dir.file("bad.json", R"({"genus":0,"k":0,"epsilon":"+"})")));
  CHECK(bad.exit_code == 2);
  CHECK_FALSE(bad.report["violations"].empty());

  CHECK(cmd_classify(config("classify", dir.file("broken.json", R"({"genus":)"))).exit_code == 1);
  CHECK(cmd_classify(config("classify", (dir.path / "absent.json").string())).exit_code == 1);

  const auto desc = cmd_classify(config("classify", kGenus6));
  CHECK(desc.exit_code == 0);
  CHECK(desc.report["genus"] == 6);
}

TEST_CASE("degeneration DAG output") {
  auto cfg = config("degenerations", kGenus6);
  cfg.depth = 1;
  const auto r = cmd_degenerations(cfg);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.report["edges"].size() == 1);
  const int child = r.report["edges"][0]["to"];
  CHECK(r.report["nodes"][child]["genus"] == 5);
  CHECK(r.report["nodes"][child]["b"]["e"]["1"] == 4);
  CHECK(r.report["nodes"][child]["b"]["f"] == 1);
  CHECK(r.report["dot"].get<std::string>().find("digraph") != std::string::npos);

  cfg.mode = "all-cases";
  const auto all = cmd_degenerations(cfg);
  bool flagged = false;
  for (const auto& e : all.report["edges"]) flagged = flagged || e["outside_elementary_list"].get<bool>();
  CHECK(flagged);

  cfg.depth = 0;
  cfg.mode = "elementary";
  const auto root = cmd_degenerations(cfg);
  CHECK(root.report["nodes"].size() == 1);
  CHECK(root.report["edges"].empty());

  cfg.mode = "bogus";
  CHECK(cmd_degenerations(cfg).exit_code == 1);
}

TEST_CASE("spectrum command") {
  auto disk = config("spectrum", "builtin:disk");
  disk.kind = "steklov";
  disk.count = 4;
  const auto d = cmd_spectrum(disk);
  REQUIRE(d.exit_code == 0);
  CHECK(d.report["normalized_first"].get<double>() == doctest::Approx(2 * kPi).epsilon(1e-2));

  auto cyl = config("spectrum", "builtin:cylinder:L=1");
  cyl.kind = "steklov";
  cyl.bc = "mixed";
  cyl.count = 4;
  const auto c = cmd_spectrum(cyl);
  REQUIRE(c.exit_code == 0);
  CHECK(c.report["eigenvalues"][1].get<double>() == doctest::Approx(std::tanh(1.0)).epsilon(1e-2));

  disk.count = 0;
  CHECK(cmd_spectrum(disk).exit_code == 1);
  CHECK(cmd_spectrum(config("spectrum", "builtin:nosuch")).exit_code == 1);
}

TEST_CASE("optimize, verify and tampering") {
  TempDir dir("eigenmax_cli_optimize");
  auto cfg = config("optimize", kSphere);
  cfg.resolution = 600;
  cfg.out = (dir.path / "a").string();
  const auto r = cmd_optimize(cfg);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["objective"].get<double>() == doctest::Approx(8 * kPi).epsilon(1e-2));
  CHECK(r.report["guards"]["all_iterates_below"].get<bool>());
  for (const char* f : {"state.json", "mesh.json", "mesh.obj", "report.json", "manifest.json"})
    CHECK(fs::exists(dir.path / "a" / f));

  // Identical configuration gives byte-identical files.
  cfg.out = (dir.path / "b").string();
  REQUIRE(cmd_optimize(cfg).exit_code == 0);
  for (const char* f : {"state.json", "report.json", "mesh.json"})
    CHECK(file_digest((dir.path / "a" / f).string()) == file_digest((dir.path / "b" / f).string()));

  const auto v = cmd_verify(config("verify", (dir.path / "a").string()));
  CHECK(v.exit_code == 0);
  CHECK(v.report["pass"].get<bool>());

  // Scale one density entry.
  {
    const auto p = dir.path / "b" / "state.json";
    nlohmann::json st = nlohmann::json::parse(std::ifstream(p));
    st["density"][7] = st["density"][7].get<double>() * 1.2;
    std::ofstream(p) << st.dump(2);
  }
  const auto t = cmd_verify(config("verify", (dir.path / "b").string()));
  CHECK(t.exit_code == 2);
  bool invariance_failed = false;
  for (const auto& c : t.report["checks"])
    if (c["check"] == "density_invariant") invariance_failed = !c["pass"].get<bool>();
  CHECK(invariance_failed);

  fs::remove(dir.path / "a" / "mesh.json");
  CHECK(cmd_verify(config("verify", (dir.path / "a").string())).exit_code == 1);
}

TEST_CASE("disk Steklov optimize") {
  auto cfg = config("optimize", kDisk);
  cfg.kind = "steklov";
  cfg.resolution = 600;
  const auto r = cmd_optimize(cfg);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["objective"].get<double>() == doctest::Approx(2 * kPi).epsilon(1e-2));
  CHECK(r.report["structure"]["area"]["strict"].get<bool>());
  cfg.kind = "mixed";
  CHECK(cmd_optimize(cfg).exit_code == 1);
}

TEST_CASE("argument parsing") {
  const char* usage[] = {"eigenmax", "spectrum"};
  CHECK(run_cli(2, usage) == 1);
  const char* unknown[] = {"eigenmax", "frobnicate"};
  CHECK(run_cli(2, unknown) == 1);
  const char* ok[] = {"eigenmax", "--jobs", "2", "classify", R"({"genus":1,"k":0,"epsilon":"+","Cp":2})"};
  CHECK(run_cli(5, ok) == 0);
}
