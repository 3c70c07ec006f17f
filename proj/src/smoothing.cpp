#include "cutloc/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "cutloc/error.hpp"

namespace cutloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge-graph distance to a seed set.
std::vector<double> graph_distance(const Mesh& mesh, const std::vector<char>& seeds) {
  std::vector<double> dist(mesh.vertex_count(), kInf);
  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (VertexId v = 0; v < seeds.size(); ++v) {
    if (seeds[v]) {
      dist[v] = 0.0;
      heap.push({0.0, v});
    }
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (VertexId nb : mesh.neighbors(v)) {
      const double nd = d + mesh.edge_length(v, nb);
      if (nd < dist[nb]) {
        dist[nb] = nd;
        heap.push({nd, nb});
      }
    }
  }
  return dist;
}

double cubic_ramp(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return std::clamp(1.0 - x * x * (3.0 - 2.0 * x), 0.0, 1.0);
}

}  // namespace

double choose_epsilon(const Mesh& mesh, const ScalarField& u, const DistanceField& distance,
                      const CutLocusTruth* truth) {
  check_same_mesh(u, mesh);
  check_same_mesh(distance.field, mesh);
  const auto& d = distance.field.values;
  double eps = 0.0;
  if (truth) {
    const double band = mesh.max_edge_length();
    double min_gap = kInf;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (truth->distance_to_cut(static_cast<VertexId>(i)) <= band) min_gap = std::min(min_gap, d[i] - u[i]);
    }
    if (min_gap == kInf) throw ConstructionError("no vertex lies within h of the cut locus");
    eps = 0.5 * min_gap;
  } else {
    double max_gap = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) max_gap = std::max(max_gap, d[i] - u[i]);
    eps = 0.25 * max_gap;
  }
  if (!(eps > 0.0)) {
    throw ConstructionError("inclusion failure: u reaches the obstacle on the cut locus (gap " +
                            std::to_string(2.0 * eps) + ")");
  }
  return eps;
}

ScalarField mollify(const Mesh& mesh, const FemOperators& ops, const DistanceField& distance, double epsilon,
                    int passes) {
  check_same_mesh(distance.field, mesh);
  check_same_mesh(distance.field, ops);
  if (!(epsilon > 0.0)) throw ParameterError("mollification epsilon must be > 0");
  if (passes < 0) throw ParameterError("mollification passes must be >= 0");

  ScalarField target = distance.field;
  for (double& x : target.values) x -= 0.5 * epsilon;
  // Slightly inside 0.49 eps so rounding in the clamp cannot exceed it.
  const double bound = 0.49 * epsilon * (1.0 - 1e-9);
  ScalarField cur = target;
  std::vector<double> next(cur.size());
  for (int pass = 0; pass < passes; ++pass) {
    for (VertexId i = 0; i < cur.size(); ++i) {
      double num = ops.mass[i] * cur[i];
      double den = ops.mass[i];
      for (VertexId j : mesh.neighbors(i)) {
        num += ops.mass[j] * cur[j];
        den += ops.mass[j];
      }
      next[i] = num / den;
    }
    cur.values.swap(next);
  }
  // Pull the whole averaged field toward the target by one common factor;
  // a pointwise clamp would copy the crease back in wherever it binds.
  double overshoot = 0.0;
  for (std::size_t i = 0; i < cur.size(); ++i) overshoot = std::max(overshoot, std::abs(cur[i] - target[i]));
  if (overshoot > bound) {
    const double s = bound / overshoot;
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = target[i] + s * (cur[i] - target[i]);
  }
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::clamp(cur[i], target[i] - bound, target[i] + bound);
  return cur;
}

ScalarField blend(const ScalarField& d, const ScalarField& rho, const ScalarField& mollified) {
  if (d.mesh_id != rho.mesh_id || d.mesh_id != mollified.mesh_id) throw MeshMismatchError();
  ScalarField out = d;
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = (1.0 - rho[i]) * d[i] + rho[i] * mollified[i];
  return out;
}

std::vector<double> second_differences(const Mesh& mesh, const ScalarField& f) {
  check_same_mesh(f, mesh);
  std::vector<double> out(f.size());
  for (VertexId i = 0; i < f.size(); ++i) {
    const auto ring = mesh.neighbors(i);
    double mean = 0.0;
    for (VertexId j : ring) mean += f[j];
    mean /= static_cast<double>(ring.size());
    out[i] = std::abs(f[i] - mean);
  }
  return out;
}

SmoothedObstacle build_smoothed(const Mesh& mesh, const FemOperators& ops, const ScalarField& u,
                                const DistanceField& distance, const CutLocusTruth* truth, int passes) {
  const auto& d = distance.field.values;
  const std::size_t n = d.size();
  SmoothedObstacle s;
  s.passes = passes;
  s.epsilon = choose_epsilon(mesh, u, distance, truth);

  if (truth) {
    s.band = mesh.max_edge_length();
    s.cut_distance = truth->distances();
  } else {
    std::vector<char> core(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = d[i] - u[i] > 2.0 * s.epsilon;
    s.band = 0.0;
    s.cut_distance = graph_distance(mesh, core);
  }

  // Closest cut vertex to b fixes the protected ball around b.
  double closest_cut = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.cut_distance[i] <= s.band) closest_cut = std::min(closest_cut, d[i]);
  }
  s.near_b_radius = 0.5 * closest_cut;

  // Largest support radius: rho must vanish at every vertex where the gap is
  // at most eps or that lies in the protected ball.
  s.sigma = kInf;
  std::vector<VertexId> conflicts;
  for (std::size_t i = 0; i < n; ++i) {
    const bool excluded = d[i] - u[i] <= s.epsilon || d[i] <= s.near_b_radius;
    if (!excluded) continue;
    s.sigma = std::min(s.sigma, s.cut_distance[i]);
    if (s.cut_distance[i] <= s.band) conflicts.push_back(static_cast<VertexId>(i));
  }
  if (!conflicts.empty() || !(s.sigma > s.band)) {
    std::string list;
    for (std::size_t k = 0; k < std::min<std::size_t>(conflicts.size(), 10); ++k) list += " " + std::to_string(conflicts[k]);
    throw ConstructionError("no admissible bump support: sigma " + std::to_string(s.sigma) + " <= band " +
                            std::to_string(s.band) + "; conflicting vertices:" + list);
  }
  if (s.sigma == kInf) s.sigma = *std::max_element(s.cut_distance.begin(), s.cut_distance.end()) + 1.0;

  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = cubic_ramp((s.cut_distance[i] - s.band) / (s.sigma - s.band));
  s.rho = ScalarField(mesh, std::move(rho));

  s.mollified = mollify(mesh, ops, distance, s.epsilon, passes);
  for (std::size_t i = 0; i < n; ++i) {
    s.mollify_deviation = std::max(s.mollify_deviation, std::abs(s.mollified[i] - (d[i] - 0.5 * s.epsilon)));
  }
  s.field = blend(distance.field, s.rho, s.mollified);

  const auto inv = check_invariants(s, u, distance);
  if (!inv.all()) {
    std::string msg = "smoothed obstacle violates:";
    for (const auto& f : inv.failures) msg += " " + f + ";";
    throw ConstructionError(msg);
  }
  return s;
}

SmoothedInvariants check_invariants(const SmoothedObstacle& s, const ScalarField& u, const DistanceField& distance) {
  const auto& d = distance.field.values;
  const auto& t = s.field.values;
  SmoothedInvariants r;
  r.between_u_and_d = r.equal_near_b = r.strictly_below_on_cut = r.rho_range = r.blend_bounds = true;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(u[i] - 1e-9 <= t[i] && t[i] <= d[i] + 1e-12)) r.between_u_and_d = false;
    if (d[i] <= s.near_b_radius && t[i] != d[i]) r.equal_near_b = false;
    const bool on_cut = s.cut_distance[i] <= s.band;
    if (on_cut && !(t[i] < d[i])) r.strictly_below_on_cut = false;
    const double rho = s.rho[i];
    if (!(rho >= 0.0 && rho <= 1.0)) r.rho_range = false;
    if (on_cut && rho != 1.0) r.rho_range = false;
    if ((d[i] - u[i] <= s.epsilon || d[i] <= s.near_b_radius) && rho != 0.0) r.rho_range = false;
    const double lo = std::min(d[i], s.mollified[i]) - 1e-12;
    const double hi = std::max(d[i], s.mollified[i]) + 1e-12;
    if (!(lo <= t[i] && t[i] <= hi)) r.blend_bounds = false;
  }
  r.mollify_bound = s.mollify_deviation <= 0.49 * s.epsilon;
  if (!r.between_u_and_d) r.failures.push_back("u <= d~ <= d_b");
  if (!r.equal_near_b) r.failures.push_back("d~ = d_b near b");
  if (!r.strictly_below_on_cut) r.failures.push_back("d~ < d_b on the cut locus");
  if (!r.rho_range) r.failures.push_back("bump support");
  if (!r.mollify_bound) r.failures.push_back("mollification bound");
  if (!r.blend_bounds) r.failures.push_back("blend bounds");
  return r;
}

CreaseMetrics crease_metrics(const Mesh& mesh, const SmoothedObstacle& s, const DistanceField& distance,
                             const ScalarField& field) {
  const auto sd = second_differences(mesh, field);
  const auto& d = distance.field.values;
  CreaseMetrics c;
  std::vector<double> away;
  for (std::size_t i = 0; i < sd.size(); ++i) {
    if (d[i] <= s.near_b_radius) continue;
    c.max_second_difference = std::max(c.max_second_difference, sd[i]);
    if (s.cut_distance[i] >= s.sigma) away.push_back(sd[i]);
  }
  if (!away.empty()) {
    auto mid = away.begin() + static_cast<std::ptrdiff_t>(away.size() / 2);
    std::nth_element(away.begin(), mid, away.end());
    c.median_away_from_cut = *mid;
  }
  return c;
}

EquivalenceResult verify_equivalence(const ObstacleProblem& original, const ScalarField& obstacle,
                                     const SolverConfig& config) {
  EquivalenceResult r;
  r.original = solve(original, config);
  const ObstacleProblem replaced(*original.ops, obstacle, original.m);
  r.smoothed = solve(replaced, config);
  for (std::size_t i = 0; i < obstacle.size(); ++i) {
    r.discrepancy = std::max(r.discrepancy, std::abs(r.smoothed.u[i] - r.original.u[i]));
  }
  return r;
}

}  // namespace cutloc
