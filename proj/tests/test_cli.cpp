#include <doctest.h>

#include <sys/wait.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cutloc/app.hpp"
#include "cutloc/config.hpp"
#include "cutloc/error.hpp"
#include "cutloc/export.hpp"

using namespace cutloc;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cutloc-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Shell {
  int status;
  std::string output;
};

Shell cli(const std::string& args, const fs::path& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = "cd '" + dir.string() + "' && '" CUTLOC_CLI "' " + args + " > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(log)};
}

nlohmann::json report(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "report.json")); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config: minimal file gets defaults") {
  const auto c = parse_config_text("surface = torus 1 1 64 64\nm = 1\n");
  CHECK(c.surface.kind == SurfaceKind::torus);
  CHECK(c.surface.n1 == 64);
  CHECK(c.m == 1.0);
  CHECK(c.solver.omega == 1.5);
  CHECK(c.solver.tol_update == 1e-11);
  CHECK(c.solver.tol_kkt == 1e-8);
  CHECK(c.solver.tol_act_rel == 1e-10);
  CHECK(c.solver.max_sweeps == 200000);
  CHECK(!c.theta.has_value());
  CHECK(c.barrier_A == std::vector<double>{1, 10, 100});
  CHECK(c.barrier_points.size() == 3);
  CHECK(c.passes == 20);
  CHECK(c.out == "cutloc-out");
}

TEST_CASE("config: sections, comments and lists") {
  const auto c = parse_config_text(
      "# run\n[surface]\nsurface = sphere 3 ; trailing\nsource = 5\nobstacle = fast_marching\n\n"
      "[problem]\nm = 2.5\n[solver]\nomega = 1.2\nmax_sweeps = 77\n[detect]\ntheta = 1e-4\n"
      "[barrier]\nA = 2 4\npoints = 0.5 0.1, 0.2 0.5\nradius = 0.01\nsamples = 300\n"
      "[blowup]\nlevels = 3 4\n[smooth]\npasses = 7\n[output]\nout = results\n");
  CHECK(c.surface.kind == SurfaceKind::sphere);
  CHECK(c.surface.subdivisions == 3);
  CHECK(c.source == 5);
  CHECK(c.obstacle == ObstacleSource::fast_marching);
  CHECK(c.m == 2.5);
  CHECK(c.solver.omega == 1.2);
  CHECK(c.solver.max_sweeps == 77);
  CHECK(*c.theta == 1e-4);
  CHECK(c.barrier_A == std::vector<double>{2, 4});
  REQUIRE(c.barrier_points.size() == 2);
  CHECK(c.barrier_points[1] == Vec2{0.2, 0.5});
  CHECK(c.barrier_radius == 0.01);
  CHECK(c.barrier_samples == 300);
  CHECK(c.blowup_levels == std::vector<int>{3, 4});
  CHECK(c.passes == 7);
  CHECK(c.out == "results");
}

TEST_CASE("config: errors") {
  try {
    parse_config_text("surface = torus 1 1 8 8\nomega = 2.5\n");
    FAIL("omega accepted");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("omega") != std::string::npos);
  }
  try {
    parse_config_text("m = 1\n\nm = 2\n");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_config_text("[solver]\nomgea = 1.2\n");
    FAIL("typo accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("omgea") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("[problem]\nomega = 1.2\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[nowhere]\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("m = -1\n"), ParameterError);
  CHECK_THROWS_AS(parse_config_text("m = one\n"), ParameterError);
  CHECK_THROWS_AS(parse_config_text("tol_kkt = 0\n"), ParameterError);
  CHECK_THROWS_AS(parse_config_text("surface = cube 3\n"), ParameterError);
  CHECK_THROWS_AS(parse_config_text("surface = torus 1 1 2 8\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("/nonexistent/cutloc.cfg"), ParseError);
}

TEST_CASE("config: overrides and paths") {
  const auto dir = workdir("paths");
  spit(dir / "run.cfg", "surface = mesh shapes/ico.off\n");
  const auto c = parse_config(dir / "run.cfg");
  CHECK(c.surface.kind == SurfaceKind::file);
  CHECK(c.surface.path == dir / "shapes/ico.off");

  auto o = parse_config_text("m = 1\n");
  apply_override(o, "m=3");
  apply_override(o, "omega = 0.9");
  CHECK(o.m == 3.0);
  CHECK(o.solver.omega == 0.9);
  CHECK_THROWS_AS(apply_override(o, "omega=7"), ParameterError);
  CHECK_THROWS_AS(apply_override(o, "nope=1"), ParseError);
  CHECK_THROWS_AS(apply_override(o, "m"), ParseError);
  CHECK(config_reference().find("omega = 1.5") != std::string::npos);
}

TEST_CASE("export formats") {
  const auto mesh = make_icosphere(0);
  std::vector<double> v(12);
  for (int i = 0; i < 12; ++i) v[i] = 0.1 * i;
  const ScalarField f(mesh, v);
  const auto csv = format_csv(f);
  CHECK(csv.rfind("vertex_id,value\n0,0\n1,0.1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);

  const auto vtk = format_vtk(mesh, f, "u");
  std::istringstream in(vtk);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  CHECK(vtk.find("ASCII\nDATASET POLYDATA\nPOINTS 12 double\n") != std::string::npos);
  CHECK(vtk.find("POLYGONS 20 80\n") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 12\nSCALARS u double 1\nLOOKUP_TABLE default\n") != std::string::npos);

  for (double x : {0.1, 1.0 / 3, -2.5e-300, 123456789.125, 0.0}) {
    const auto s = format_number(x);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
  CHECK_THROWS_AS(format_vtk(make_icosphere(0), f, "u"), MeshMismatchError);
}

TEST_CASE("directory lock") {
  const auto dir = workdir("lock");
  {
    DirectoryLock a(dir);
    CHECK(fs::exists(dir / DirectoryLock::kMarker));
    CHECK_THROWS_AS(DirectoryLock{dir}, LockedError);
  }
  CHECK(!fs::exists(dir / DirectoryLock::kMarker));
}

TEST_CASE("cli: solve on the 64x64 torus") {
  const auto dir = workdir("solve");
  spit(dir / "run.cfg", "surface = torus 1 1 64 64\nm = 1\n");
  const auto r = cli("solve --config run.cfg --out out", dir);
  CHECK(r.status == 0);
  for (const char* f : {"u.vtk", "u.csv", "d.vtk", "d.csv", "report.json"}) CHECK(fs::exists(dir / "out" / f));
  CHECK(!fs::exists(dir / "out" / DirectoryLock::kMarker));
  const auto j = report(dir / "out");
  CHECK(j["ok"] == true);
  CHECK(j["error"].is_null());
  CHECK(j["solve"]["kkt_residual"].get<double>() <= 1e-8);
  CHECK(j["timings"].contains("solve"));
  const auto csv = slurp(dir / "out" / "u.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4097);
}

TEST_CASE("cli: barrier certificate in the report") {
  const auto dir = workdir("barrier");
  spit(dir / "run.cfg", "surface = torus 1 1 16 16\n[barrier]\nA = 10\npoints = 0.5 0\n");
  const auto r = cli("barrier --config run.cfg --out out", dir);
  CHECK(r.status == 0);
  const auto j = report(dir / "out");
  REQUIRE(j["barrier"].size() == 1);
  CHECK(j["barrier"][0]["laplacian_at_p"].get<double>() == -10.0);
  CHECK(j["barrier"][0]["B"].get<double>() == doctest::Approx(3.75));
  CHECK(j["checks"]["barrier.valid"] == true);
}

TEST_CASE("cli: usage errors") {
  const auto dir = workdir("usage");
  spit(dir / "run.cfg", "surface = torus 1 1 8 8\n");
  const auto r = cli("frobnicate --config run.cfg", dir);
  CHECK(r.status != 0);
  CHECK(r.output.find("unknown command") != std::string::npos);
  CHECK(r.output.find("cutloc <command> --config <path>") != std::string::npos);

  const auto bad = cli("solve --config run.cfg --override omega=2.5", dir);
  CHECK(bad.status != 0);
  CHECK(bad.output.find("omega") != std::string::npos);

  const auto help = cli("--help", dir);
  CHECK(help.status == 0);
  CHECK(help.output.find("tol_kkt = 1e-8") != std::string::npos);

  CHECK(cli("solve", dir).status != 0);
}

TEST_CASE("cli: module errors land in the report") {
  const auto dir = workdir("errors");
  spit(dir / "run.cfg", "surface = sphere 2\n");
  const auto r = cli("barrier --config run.cfg --out out", dir);
  CHECK(r.status != 0);
  const auto j = report(dir / "out");
  CHECK(j["ok"] == false);
  CHECK(j["error"]["kind"] == "unsupported_surface");

  const auto s = cli("solve --config run.cfg --out tight --override max_sweeps=2", dir);
  CHECK(s.status != 0);
  const auto k = report(dir / "tight");
  CHECK(k["error"]["kind"] == "solver_failure");
  CHECK(k["solve"]["iterations"] == 2);
}

TEST_CASE("cli: busy output directory") {
  const auto dir = workdir("busy");
  spit(dir / "run.cfg", "surface = torus 1 1 8 8\n");
  fs::create_directories(dir / "out");
  spit(dir / "out" / DirectoryLock::kMarker, "1\n");
  const auto r = cli("solve --config run.cfg --out out", dir);
  CHECK(r.status == 3);
  CHECK(!fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("cli: generic mesh file") {
  const auto dir = workdir("file");
  fs::create_directories(dir / "shapes");
  save_mesh(make_icosphere(3), dir / "shapes" / "ico.off", MeshFormat::off);
  spit(dir / "run.cfg", "surface = mesh shapes/ico.off\n");
  const auto r = cli("smooth --config run.cfg --out out", dir);
  CHECK(r.status == 0);
  const auto j = report(dir / "out");
  CHECK(j["distance"]["method"] == "fast_marching");
  CHECK(j["mesh"]["surface"] == "generic");
  CHECK(fs::exists(dir / "out" / "dtilde.vtk"));
}

TEST_CASE("cli: identical runs give identical artifacts") {
  const auto dir = workdir("repro");
  spit(dir / "run.cfg", "surface = torus 1 1 24 24\n[barrier]\nsamples = 500\n[blowup]\nlevels = 16 32\n");
  REQUIRE(cli("all --config run.cfg --out a", dir).status == 0);
  REQUIRE(cli("all --config run.cfg --out b", dir).status == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    if (name.extension() == ".csv" || name.extension() == ".vtk") {
      CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
      ++compared;
    }
  }
  CHECK(compared == 12);
  auto ja = report(dir / "a"), jb = report(dir / "b");
  ja.erase("timings");
  jb.erase("timings");
  CHECK(ja.dump() == jb.dump());
}

}  // TEST_SUITE
