// End-to-end acceptance checks. One PASS/FAIL line per criterion; nonzero
// exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "cutloc/barrier.hpp"
#include "cutloc/cutlocus.hpp"
#include "cutloc/smoothing.hpp"

using namespace cutloc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double max_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

// Criterion 4 collects every converged solve made by the other criteria.
struct KktLedger {
  std::size_t solves = 0;
  double worst_inactive = 0.0;  // max |g| / scale over inactive vertices
  double worst_active = 0.0;    // max g / scale over active vertices (may be negative)
  double worst_mismatch = 0.0;  // report vs recomputation
  bool all_converged = true;

  void add(const ObstacleProblem& p, const ObstacleSolution& s) {
    ++solves;
    all_converged = all_converged && s.converged;
    const double scale = p.m * p.ops->max_mass();
    worst_inactive = std::max(worst_inactive, s.kkt.max_abs_g_inactive / scale);
    worst_active = std::max(worst_active, s.kkt.max_g_active / scale);
    // recompute g = 2 L u - m mass from scratch
    auto g = matvec(p.ops->stiffness, s.u.values);
    double inactive = 0.0, active = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = 2.0 * g[i] - p.m * p.ops->mass[i];
      const double d = p.obstacle[i];
      if (s.u[i] >= d - 1e-10 * (1.0 + std::abs(d))) active = std::max(active, g[i]);
      else inactive = std::max(inactive, std::abs(g[i]));
    }
    worst_mismatch = std::max({worst_mismatch, std::abs(inactive - s.kkt.max_abs_g_inactive) / scale,
                               std::abs(std::max(active, 0.0) - s.kkt.max_g_active) / scale});
  }
};

KktLedger kkt_ledger;

ObstacleSolution tracked_solve(const ObstacleProblem& p, const SolverConfig& cfg = {},
                               const std::optional<ScalarField>& start = std::nullopt) {
  auto s = solve(p, cfg, start);
  kkt_ledger.add(p, s);
  return s;
}

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

template <class F>
void criterion(int id, const char* name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("error: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1: inclusion on the 128x128 torus
void inclusion_torus() {
  const auto t0 = Clock::now();
  const int n = 128;
  const auto mesh = make_flat_torus(1, 1, n, n);
  const auto d = analytic_distance(mesh, SourcePoint{0});
  const auto truth = analytic_cut_locus(mesh, SourcePoint{0});
  const auto ops = assemble(mesh);
  const ObstacleProblem p(ops, d.field, 1.0);
  const auto s = tracked_solve(p);
  const double h = 1.0 / n;
  const auto r = detect(mesh, s, d, &truth, default_theta({}), h);
  const double elapsed = seconds_since(t0);

  SolverConfig other;
  other.omega = 1.9;
  const auto s2 = tracked_solve(p, other);
  const auto r2 = detect(mesh, s2, d, &truth, default_theta({}), h);

  const double delta = r.min_gap_on_cut, delta2 = r2.min_gap_on_cut;
  const bool stable = std::abs(delta2 - delta) <= 0.2 * delta;
  const bool pass = delta > 0.0 && stable && r.coverage == 1.0 && s.kkt.feasibility_violation == 0.0 &&
                    s2.kkt.feasibility_violation == 0.0 && elapsed <= 60.0;
  report(1, "inclusion, torus 128x128", pass,
         fmt("delta=%.6g (rerun omega=1.9: %.6g), cross vertices=%zu, coverage=%.3f, feasibility=%g, %.1fs", delta,
             delta2, r.cut_vertex_count, r.coverage, s.kkt.feasibility_violation, elapsed));
}

// 2: inclusion on the sphere
void inclusion_sphere() {
  const auto t0 = Clock::now();
  const auto mesh = make_icosphere(5);
  const auto d = analytic_distance(mesh, SourcePoint{0});
  const auto truth = analytic_cut_locus(mesh, SourcePoint{0});
  const auto ops = assemble(mesh);
  const ObstacleProblem p(ops, d.field, 1.0);
  const auto s = tracked_solve(p);
  const double h = mesh.max_edge_length();
  const auto r = detect(mesh, s, d, &truth, default_theta({}), 2 * h);
  const double elapsed = seconds_since(t0);
  const bool pass = r.coverage == 1.0 && r.min_gap_on_cut > 0.0 && elapsed <= 60.0;
  report(2, "inclusion, icosphere 5", pass,
         fmt("%zu vertices within 2h of the antipode, flagged fraction %.3f, min gap %.6g, %.1fs", r.cut_vertex_count,
             r.coverage, r.min_gap_on_cut, elapsed));
}

// 3: projected SOR against the projected-gradient oracle
void oracle_equivalence() {
  std::mt19937 rng(20240611);
  std::uniform_int_distribution<int> res(3, 17);
  std::uniform_real_distribution<double> len(0.5, 2.0);
  const double loads[] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  std::string sizes;
  for (int k = 0; k < 10; ++k) {
    int n1, n2;
    do {
      n1 = res(rng);
      n2 = res(rng);
    } while (n1 * n2 > 300);
    const double L1 = len(rng), L2 = len(rng);
    const auto mesh = make_flat_torus(L1, L2, n1, n2);
    const VertexId b = std::uniform_int_distribution<VertexId>(0, VertexId(mesh.vertex_count() - 1))(rng);
    const double m = loads[k % 3];
    const auto d = analytic_distance(mesh, SourcePoint{b});
    const auto ops = assemble(mesh);
    const ObstacleProblem p(ops, d.field, m);
    const auto s = tracked_solve(p);
    const auto o = oracle_solve(p, 1e-14);
    if (!o.converged) throw Error("oracle did not converge on instance " + std::to_string(k));
    worst = std::max(worst, max_diff(s.u.values, o.u.values));
    sizes += fmt("%s%dx%d", k ? "," : "", n1, n2);
  }
  report(3, "solver vs oracle", worst <= 1e-7, fmt("max |solve - oracle| = %.3g over 10 instances (%s)", worst, sizes.c_str()));
}

// 5: barrier certificates
void barriers() {
  const auto t0 = Clock::now();
  const auto mesh = make_flat_torus(1, 1, 64, 64);
  bool pass = true;
  double worst_gap = 0.0, worst_margin = 1e300, worst_radius = 1e300;
  std::size_t min_samples = SIZE_MAX;
  int count = 0;
  bool exact = true;
  for (Vec2 p : {Vec2{0.5, 0.0}, Vec2{0.5, 0.25}, Vec2{0.3, 0.5}}) {
    for (double A : {1.0, 10.0, 100.0}) {
      const auto c = build_barrier(mesh, SourcePoint{0}, p, A);
      const double formula = 2.0 * 2.0 * c.C - 2.0 * c.B * dot(c.v - c.w, c.v - c.w);
      pass = pass && std::abs(c.value_gap_at_p) <= 1e-12 && c.local_min_margin >= -1e-12 && formula == -A &&
             c.laplacian_at_p == -A && c.samples >= 10000 && c.v != c.w;
      exact = exact && formula == -A && c.laplacian_at_p == -A;
      worst_gap = std::max(worst_gap, std::abs(c.value_gap_at_p));
      worst_margin = std::min(worst_margin, c.local_min_margin);
      worst_radius = std::min(worst_radius, c.radius);
      min_samples = std::min(min_samples, c.samples);
      ++count;
    }
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed <= 5.0;
  report(5, "barrier certificates", pass,
         fmt("%d certificates, Laplacian == -A: %s, max |phi(p)-d(p)| = %.3g, min margin = %.3g, >= %zu samples, "
             "smallest radius %.4g, %.2fs",
             count, exact ? "yes" : "no", worst_gap, worst_margin, min_samples, worst_radius, elapsed));
}

// 6: Laplacian blow-up
void blowup() {
  bool pass = true;
  std::string detail;
  std::vector<Mesh> spheres;
  for (int k : {4, 5}) {
    spheres.push_back(make_icosphere(k));
    const auto rad = sphere_radial_laplacian(spheres.back(), SourcePoint{0});
    pass = pass && rad.passed();
    detail += fmt("sphere %d: |Lap d - cot r| <= %.3g (tol %.3g); ", k, rad.max_error, rad.tolerance);
  }
  const auto srows = blowup_probe(spheres, SourcePoint{0});
  pass = pass && srows[0].min_laplacian < 0.0 && srows[1].min_laplacian < srows[0].min_laplacian;
  detail += fmt("antipode min %.4g -> %.4g; ", srows[0].min_laplacian, srows[1].min_laplacian);

  std::vector<Mesh> tori;
  for (int n : {64, 128}) tori.push_back(make_flat_torus(1, 1, n, n));
  const auto trows = blowup_probe(tori, SourcePoint{0});
  for (std::size_t k = 0; k < trows.size(); ++k) {
    const double spacing = 1.0 / (k == 0 ? 64 : 128);
    const double bound = -1.0 / (4.0 * spacing);
    pass = pass && trows[k].min_laplacian <= bound;
    detail += fmt("torus %d: min %.4g <= %.4g%s", k == 0 ? 64 : 128, trows[k].min_laplacian, bound, k ? "" : "; ");
  }
  report(6, "Laplacian blow-up", pass, detail);
}

// 7: smoothed obstacle equivalence
void smoothed_equivalence() {
  bool pass = true;
  std::string detail;
  for (int surface = 0; surface < 2; ++surface) {
    const auto mesh = surface == 0 ? make_flat_torus(1, 1, 64, 64) : make_icosphere(4);
    const auto d = analytic_distance(mesh, SourcePoint{0});
    const auto truth = analytic_cut_locus(mesh, SourcePoint{0});
    const auto ops = assemble(mesh);
    const ObstacleProblem p(ops, d.field, 1.0);
    const auto s = tracked_solve(p);
    const auto sm = build_smoothed(mesh, ops, s.u, d, &truth);
    const auto inv = check_invariants(sm, s.u, d);
    const auto eq = verify_equivalence(p, sm, {});
    kkt_ledger.add(p, eq.original);
    kkt_ledger.add(ObstacleProblem(ops, sm.field, 1.0), eq.smoothed);
    ScalarField broken = d.field;
    for (double& v : broken.values) v -= sm.epsilon;
    const auto neg = verify_equivalence(p, broken, {});
    const bool ok = inv.all() && sm.mollify_deviation <= 0.49 * sm.epsilon && eq.discrepancy <= 1e-6 &&
                    neg.discrepancy > 1e-3;
    pass = pass && ok;
    detail += fmt("%s: eps=%.4g, deviation=%.3f eps, discrepancy=%.3g, broken control=%.3g%s",
                  surface == 0 ? "torus 64" : "sphere 4", sm.epsilon, sm.mollify_deviation / sm.epsilon, eq.discrepancy,
                  neg.discrepancy, surface == 0 ? "; " : "");
    if (!inv.all()) {
      for (const auto& f : inv.failures) detail += " [" + f + "]";
    }
  }
  report(7, "smoothed obstacle equivalence", pass, detail);
}

// 8: structural properties
void structural() {
  const auto mesh = make_flat_torus(1, 1, 32, 32);
  const auto d = analytic_distance(mesh, SourcePoint{0});
  const auto ops = assemble(mesh);
  const ObstacleProblem p(ops, d.field, 1.0);

  SolverConfig watch;
  double prev = energy(ops, d.field, 1.0), uphill = 0.0;
  watch.on_sweep = [&](long, std::span<const double> u) {
    const double e = energy(ops, ScalarField(mesh, std::vector<double>(u.begin(), u.end())), 1.0);
    uphill = std::max(uphill, e - prev);
    prev = e;
  };
  const auto a = tracked_solve(p, watch);

  ScalarField start = d.field;
  for (double& v : start.values) v -= 1.0;
  const auto b = tracked_solve(p, {}, start);
  const double uniqueness = max_diff(a.u.values, b.u.values);

  double order_violation = 0.0;
  std::vector<ScalarField> by_m;
  for (double m : {0.5, 1.0, 2.0}) {
    const ObstacleProblem pm(ops, d.field, m);
    by_m.push_back(tracked_solve(pm).u);
  }
  for (std::size_t k = 1; k < by_m.size(); ++k) {
    for (std::size_t i = 0; i < by_m[k].size(); ++i) order_violation = std::max(order_violation, by_m[k - 1][i] - by_m[k][i]);
  }

  bool fmm_ok = true;
  std::string fmm;
  for (int surface = 0; surface < 2; ++surface) {
    double last = 1e300;
    for (int level = 0; level < 3; ++level) {
      const auto m = surface == 0 ? make_flat_torus(1, 1, 32 << level, 32 << level) : make_icosphere(3 + level);
      const double e = max_diff(fast_marching(m, SourcePoint{0}).field.values, analytic_distance(m, SourcePoint{0}).field.values);
      fmm_ok = fmm_ok && e <= 5 * m.max_edge_length() && e < last;
      fmm += fmt("%s%.3g", level ? " > " : (surface ? "; sphere " : "torus "), e);
      last = e;
    }
  }
  const bool pass = uphill <= 1e-12 && a.max_energy_increase <= 1e-12 && uniqueness <= 1e-7 &&
                    order_violation <= 1e-9 && fmm_ok;
  report(8, "structural properties", pass,
         fmt("max uphill step %.3g, two-start gap %.3g, m-order violation %.3g, fast marching error %s", uphill,
             uniqueness, order_violation, fmm.c_str()));
}

}  // namespace

int main() {
  criterion(1, "inclusion, torus 128x128", inclusion_torus);
  criterion(2, "inclusion, icosphere 5", inclusion_sphere);
  criterion(3, "solver vs oracle", oracle_equivalence);
  criterion(5, "barrier certificates", barriers);
  criterion(6, "Laplacian blow-up", blowup);
  criterion(7, "smoothed obstacle equivalence", smoothed_equivalence);
  criterion(8, "structural properties", structural);
  // 4 last: it audits every solve above
  {
    const auto& k = kkt_ledger;
    const bool pass = k.solves > 0 && k.all_converged && k.worst_inactive <= 1e-8 && k.worst_active <= 1e-8 &&
                      k.worst_mismatch <= 1e-12;
    report(4, "KKT sign structure", pass,
           fmt("%zu solves, max |g|/scale inactive %.3g, max g/scale active %.3g, report vs recomputation %.3g",
               k.solves, k.worst_inactive, k.worst_active, k.worst_mismatch));
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
