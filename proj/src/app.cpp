#include "cutloc/app.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <optional>

#include <json.hpp>

#include "cutloc/barrier.hpp"
#include "cutloc/cutlocus.hpp"
#include "cutloc/export.hpp"
#include "cutloc/fem.hpp"
#include "cutloc/geodesic.hpp"
#include "cutloc/obstacle.hpp"
#include "cutloc/smoothing.hpp"

namespace cutloc {

using nlohmann::ordered_json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve", "detect", "barrier", "blowup", "smooth", "all"};
  return names;
}

bool is_command(std::string_view name) {
  for (const auto& c : command_names()) {
    if (c == name) return true;
  }
  return false;
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : marker_(dir / kMarker) {
  const int fd = ::open(marker_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw LockedError("output directory '" + dir.string() + "' is in use (remove " + marker_.string() +
                      " if no run is active)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  std::filesystem::remove(marker_, ec);
}

namespace {

// nlohmann writes non-finite doubles as null; keep them readable instead.
ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const SolverFailure*>(&e)) return "solver_failure";
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter_error";
  if (dynamic_cast<const TopologyError*>(&e)) return "topology_error";
  if (dynamic_cast<const MeshMismatchError*>(&e)) return "mesh_mismatch";
  if (dynamic_cast<const UnsupportedSurfaceError*>(&e)) return "unsupported_surface";
  if (dynamic_cast<const AssemblyError*>(&e)) return "assembly_error";
  if (dynamic_cast<const ConstructionError*>(&e)) return "construction_error";
  return "error";
}

ScalarField indicator(const Mesh& mesh, const std::vector<char>& flags) {
  std::vector<double> v(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) v[i] = flags[i] ? 1.0 : 0.0;
  return ScalarField(mesh, std::move(v));
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["surface"] = c.surface.to_string();
  j["source"] = c.source;
  j["obstacle"] = c.obstacle == ObstacleSource::automatic ? "auto"
                  : c.obstacle == ObstacleSource::analytic ? "analytic"
                                                           : "fast_marching";
  j["m"] = c.m;
  j["omega"] = c.solver.omega;
  j["tol_update"] = c.solver.tol_update;
  j["tol_kkt"] = c.solver.tol_kkt;
  j["tol_act"] = c.solver.tol_act_rel;
  j["max_sweeps"] = c.solver.max_sweeps;
  j["theta"] = c.theta ? ordered_json(*c.theta) : ordered_json(default_theta(c.solver));
  j["A"] = c.barrier_A;
  ordered_json pts = ordered_json::array();
  for (const auto& p : c.barrier_points) pts.push_back({p[0], p[1]});
  j["points"] = pts;
  j["radius"] = c.barrier_radius;
  j["samples"] = c.barrier_samples;
  j["levels"] = c.blowup_levels;
  j["passes"] = c.passes;
  return j;
}

ordered_json kkt_json(const KktReport& k) {
  return {{"max_abs_g_inactive", num(k.max_abs_g_inactive)},
          {"max_g_active", num(k.max_g_active)},
          {"feasibility_violation", num(k.feasibility_violation)},
          {"complementarity", num(k.complementarity)},
          {"scale", num(k.scale)},
          {"active_count", k.active_count}};
}

ordered_json solution_json(const ObstacleSolution& s) {
  return {{"converged", s.converged},
          {"iterations", s.iterations},
          {"kkt_residual", num(s.kkt_residual)},
          {"energy", num(s.energy)},
          {"last_update", num(s.last_update)},
          {"max_energy_increase", num(s.max_energy_increase)},
          {"kkt", kkt_json(s.kkt)}};
}

class Runner {
 public:
  Runner(const RunConfig& config, ordered_json& report) : config_(config), report_(report) {}

  void execute(std::string_view command) {
    const bool all = command == "all";
    if (command == "barrier") {
      barrier();
      return;
    }
    if (command == "blowup") {
      blowup();
      return;
    }
    prepare();
    solve_problem();
    if (command == "detect" || all) detect_cut();
    if (all) {
      if (mesh_->is_flat_torus()) barrier();
      else report_["barrier"] = {{"skipped", "needs a flat torus"}};
      if (mesh_->is_flat_torus() || mesh_->is_unit_sphere()) blowup();
      else report_["blowup"] = {{"skipped", "needs an analytic surface"}};
    }
    if (command == "smooth" || all) smooth();
  }

 private:
  template <class F>
  auto timed(const char* name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, t0);
    } else {
      auto r = f();
      record(name, t0);
      return r;
    }
  }

  void record(const char* name, std::chrono::steady_clock::time_point t0) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    report_["timings"][name] = dt.count();
  }

  void check(const std::string& name, bool passed) { report_["checks"][name] = passed; }

  void load_mesh_once() {
    if (mesh_) return;
    mesh_ = timed("mesh", [&] { return build_surface(config_.surface); });
    check_source(*mesh_, SourcePoint{config_.source});
    report_["mesh"] = {{"surface", surface_name(mesh_->tag())},
                       {"vertices", mesh_->vertex_count()},
                       {"triangles", mesh_->triangle_count()},
                       {"h", mesh_->max_edge_length()},
                       {"area", mesh_->total_area()}};
  }

  void prepare() {
    load_mesh_once();
    const SourcePoint b{config_.source};
    const bool analytic_surface = mesh_->is_flat_torus() || mesh_->is_unit_sphere();
    bool use_analytic = analytic_surface;
    if (config_.obstacle == ObstacleSource::fast_marching) use_analytic = false;
    if (config_.obstacle == ObstacleSource::analytic) {
      if (!analytic_surface) throw UnsupportedSurfaceError("analytic obstacle needs a flat torus or the unit sphere");
      use_analytic = true;
    }
    distance_ = timed("distance", [&] { return use_analytic ? analytic_distance(*mesh_, b) : fast_marching(*mesh_, b); });
    if (analytic_surface) truth_ = analytic_cut_locus(*mesh_, b);
    ops_ = timed("assemble", [&] { return assemble(*mesh_); });
    problem_.emplace(*ops_, distance_->field, config_.m);
    report_["distance"] = {{"method", method_name(distance_->method)}};
    write_field(*mesh_, distance_->field, config_.out, "d");
  }

  void solve_problem() {
    ObstacleSolution sol = timed("solve", [&] { return solve(*problem_, config_.solver); });
    report_["solve"] = solution_json(sol);
    check("solve.converged", sol.converged);
    check("solve.kkt", sol.kkt_residual <= config_.solver.tol_kkt);
    check("solve.feasible", sol.kkt.feasibility_violation == 0.0);
    check("solve.energy_monotone", sol.max_energy_increase <= 1e-12);
    write_field(*mesh_, sol.u, config_.out, "u");
    solution_ = std::move(sol);
  }

  void detect_cut() {
    const double theta = config_.theta ? *config_.theta : default_theta(config_.solver);
    const CutLocusTruth* truth = truth_ ? &*truth_ : nullptr;
    const auto r = timed("detect", [&] { return detect(*mesh_, *solution_, *distance_, truth, theta); });
    ordered_json j{{"theta", theta},
                   {"band", r.band},
                   {"noncontact_count", r.noncontact_count},
                   {"scored", r.scored}};
    if (r.scored) {
      j["cut_vertex_count"] = r.cut_vertex_count;
      j["coverage"] = num(r.coverage);
      j["excess_radius"] = num(r.excess_radius);
      j["min_gap_on_cut"] = num(r.min_gap_on_cut);
      j["inclusion_holds"] = r.inclusion_holds();
      check("detect.inclusion", r.inclusion_holds());
    }
    report_["detect"] = j;
    write_field(*mesh_, indicator(*mesh_, r.noncontact), config_.out, "noncontact");
  }

  void barrier() {
    load_mesh_once();
    if (!mesh_->is_flat_torus()) throw UnsupportedSurfaceError("barrier certificates need a flat torus");
    BarrierOptions opt{config_.barrier_radius, config_.barrier_samples};
    ordered_json list = ordered_json::array();
    bool all_valid = true;
    timed("barrier", [&] {
      for (const auto& p : config_.barrier_points) {
        for (double A : config_.barrier_A) {
          const auto c = build_barrier(*mesh_, SourcePoint{config_.source}, p, A, opt);
          all_valid = all_valid && c.valid();
          list.push_back({{"p", {c.p[0], c.p[1]}},
                          {"A", c.A},
                          {"v", {c.v[0], c.v[1]}},
                          {"w", {c.w[0], c.w[1]}},
                          {"C", c.C},
                          {"B", c.B},
                          {"distance_at_p", c.distance_at_p},
                          {"laplacian_at_p", c.laplacian_at_p},
                          {"value_gap_at_p", c.value_gap_at_p},
                          {"local_min_margin", num(c.local_min_margin)},
                          {"subgradient_violation", num(c.subgradient_violation)},
                          {"radius", c.radius},
                          {"samples", c.samples},
                          {"valid", c.valid()}});
        }
      }
    });
    report_["barrier"] = list;
    check("barrier.valid", all_valid);
  }

  void blowup() {
    load_mesh_once();
    const bool torus = mesh_->is_flat_torus();
    if (!torus && !mesh_->is_unit_sphere()) throw UnsupportedSurfaceError("blowup probe needs an analytic surface");
    std::vector<int> levels = config_.blowup_levels;
    if (levels.empty()) levels = torus ? std::vector<int>{64, 128} : std::vector<int>{4, 5};
    timed("blowup", [&] {
      std::vector<Mesh> meshes;
      for (int n : levels) {
        if (torus) meshes.push_back(make_flat_torus(mesh_->torus().L1, mesh_->torus().L2, n, n));
        else meshes.push_back(make_icosphere(n));
      }
      const SourcePoint b{0};
      const auto rows = blowup_probe(meshes, b);
      ordered_json table = ordered_json::array();
      bool ok = true;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        ordered_json row{{"level", levels[k]},
                         {"h", r.h},
                         {"vertices", r.vertices},
                         {"near_cut", r.near_cut},
                         {"min_laplacian", num(r.min_laplacian)}};
        if (torus) {
          row["bound"] = -1.0 / (4.0 * r.h);
          ok = ok && r.min_laplacian <= -1.0 / (4.0 * r.h);
        } else {
          const auto rad = sphere_radial_laplacian(meshes[k], b);
          row["radial_max_error"] = num(rad.max_error);
          row["radial_tolerance"] = rad.tolerance;
          row["radial_checked"] = rad.checked;
          ok = ok && rad.passed() && r.min_laplacian < 0.0;
          if (k > 0) ok = ok && r.min_laplacian < rows[k - 1].min_laplacian;
        }
        table.push_back(row);
      }
      report_["blowup"] = {{"source", 0}, {"rows", table}};
      check("blowup.diverges", ok);
    });
  }

  void smooth() {
    const CutLocusTruth* truth = truth_ ? &*truth_ : nullptr;
    const auto s = timed("smooth", [&] {
      return build_smoothed(*mesh_, *ops_, solution_->u, *distance_, truth, config_.passes);
    });
    const auto inv = check_invariants(s, solution_->u, *distance_);
    const auto eq = timed("equivalence", [&] { return verify_equivalence(*problem_, s, config_.solver); });
    const auto crease_d = crease_metrics(*mesh_, s, *distance_, distance_->field);
    const auto crease_t = crease_metrics(*mesh_, s, *distance_, s.field);
    report_["smooth"] = {{"epsilon", s.epsilon},
                         {"near_b_radius", s.near_b_radius},
                         {"sigma", num(s.sigma)},
                         {"band", s.band},
                         {"passes", s.passes},
                         {"mollify_deviation", s.mollify_deviation},
                         {"mollify_deviation_over_epsilon", s.mollify_deviation / s.epsilon},
                         {"invariants", inv.failures},
                         {"equivalence_discrepancy", num(eq.discrepancy)},
                         {"crease_ratio_d", num(crease_d.ratio())},
                         {"crease_ratio_dtilde", num(crease_t.ratio())},
                         {"max_second_difference_d", num(crease_d.max_second_difference)},
                         {"max_second_difference_dtilde", num(crease_t.max_second_difference)}};
    check("smooth.invariants", inv.all());
    check("smooth.mollify_bound", s.mollify_deviation <= 0.49 * s.epsilon);
    check("smooth.equivalence", eq.discrepancy <= 10.0 * config_.solver.tol_kkt);
    check("smooth.crease_reduced", crease_t.max_second_difference < crease_d.max_second_difference);
    write_field(*mesh_, s.field, config_.out, "dtilde");
    write_field(*mesh_, s.rho, config_.out, "rho");
    write_field(*mesh_, s.mollified, config_.out, "mollified");
  }

  const RunConfig& config_;
  ordered_json& report_;
  std::optional<Mesh> mesh_;
  std::optional<DistanceField> distance_;
  std::optional<CutLocusTruth> truth_;
  std::optional<FemOperators> ops_;
  std::optional<ObstacleProblem> problem_;
  std::optional<ObstacleSolution> solution_;
};

}  // namespace

RunOutcome run(std::string_view command, const RunConfig& config) {
  RunOutcome outcome;
  outcome.out_dir = config.out;
  if (!is_command(command)) throw ParameterError("unknown command '" + std::string(command) + "'");
  config.validate();
  std::filesystem::create_directories(config.out);
  DirectoryLock lock(config.out);

  ordered_json report;
  report["command"] = std::string(command);
  report["config"] = config_json(config);
  report["checks"] = ordered_json::object();
  report["timings"] = ordered_json::object();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Runner(config, report).execute(command);
    report["error"] = nullptr;
  } catch (const SolverFailure& e) {
    report["solve"] = solution_json(e.last());
    report["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
    outcome.error = e.what();
  } catch (const std::exception& e) {
    report["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
    outcome.error = e.what();
  }
  const std::chrono::duration<double> total = std::chrono::steady_clock::now() - t0;
  report["timings"]["total"] = total.count();

  bool ok = outcome.error.empty();
  for (const auto& [name, passed] : report["checks"].items()) ok = ok && passed.get<bool>();
  report["ok"] = ok;
  // Timings last so the rest of the file compares byte-for-byte across runs.
  auto timings = report["timings"];
  report.erase("timings");
  report["timings"] = timings;
  write_text(config.out / "report.json", report.dump(2) + "\n");

  outcome.ok = ok;
  outcome.exit_code = ok ? 0 : (outcome.error.empty() ? 1 : 2);
  return outcome;
}

}  // namespace cutloc
