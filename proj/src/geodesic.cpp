#include "cutloc/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "cutloc/error.hpp"

namespace cutloc {

namespace {

double wrap(double d, double period) { return d - period * std::round(d / period); }

// Angle between two unit vectors, accurate near 0 and pi.
double sphere_angle(const Vec3& a, const Vec3& b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

}  // namespace

std::string method_name(DistanceMethod m) { return m == DistanceMethod::analytic ? "analytic" : "fast_marching"; }

double torus_distance(const FlatTorus& torus, Vec2 b, Vec2 p) {
  // Translate p next to b first so the 3x3 window is centred on the minimum.
  const double du = wrap(p[0] - b[0], torus.L1);
  const double dv = wrap(p[1] - b[1], torus.L2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      best = std::min(best, std::hypot(du + i * torus.L1, dv + j * torus.L2));
    }
  }
  return best;
}

std::vector<Vec2> torus_minimizing_translates(const FlatTorus& torus, Vec2 b, Vec2 p, double tol) {
  const double su = (p[0] - b[0]) - wrap(p[0] - b[0], torus.L1);
  const double sv = (p[1] - b[1]) - wrap(p[1] - b[1], torus.L2);
  const double best = torus_distance(torus, b, p);
  std::vector<Vec2> out;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const Vec2 t{su - i * torus.L1, sv - j * torus.L2};
      const Vec2 r = p - (b + t);
      if (norm(r) <= best + tol) out.push_back(t);
    }
  }
  return out;
}

double torus_cut_distance(const FlatTorus& torus, Vec2 b, Vec2 p) {
  const double du = std::abs(wrap(p[0] - b[0] - 0.5 * torus.L1, torus.L1));
  const double dv = std::abs(wrap(p[1] - b[1] - 0.5 * torus.L2, torus.L2));
  return std::min(du, dv);
}

double diameter_bound(const Mesh& mesh) {
  if (mesh.is_flat_torus()) {
    const auto& t = mesh.torus();
    return 0.5 * std::hypot(t.L1, t.L2);
  }
  if (mesh.is_unit_sphere()) return std::numbers::pi;
  throw UnsupportedSurfaceError("no analytic diameter bound for a generic surface");
}

DistanceField analytic_distance(const Mesh& mesh, SourcePoint b) {
  check_source(mesh, b);
  std::vector<double> d(mesh.vertex_count());
  if (mesh.is_flat_torus()) {
    const auto& uv = mesh.uv();
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = torus_distance(mesh.torus(), uv[b.vertex], uv[v]);
  } else if (mesh.is_unit_sphere()) {
    const auto& x = mesh.vertices();
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = sphere_angle(x[b.vertex], x[v]);
  } else {
    throw UnsupportedSurfaceError("analytic distance requires a flat torus or unit sphere");
  }
  d[b.vertex] = 0.0;
  return {ScalarField(mesh, std::move(d)), b, DistanceMethod::analytic};
}

CutLocusTruth analytic_cut_locus(const Mesh& mesh, SourcePoint b) {
  check_source(mesh, b);
  CutLocusTruth truth;
  truth.mesh_id_ = mesh.id();
  truth.distance_.resize(mesh.vertex_count());
  if (mesh.is_flat_torus()) {
    const auto& t = mesh.torus();
    const auto& uv = mesh.uv();
    for (std::size_t v = 0; v < uv.size(); ++v) truth.distance_[v] = torus_cut_distance(t, uv[b.vertex], uv[v]);
    const Vec2 c{uv[b.vertex][0] + 0.5 * t.L1, uv[b.vertex][1] + 0.5 * t.L2};
    truth.description_ = "cross u = " + std::to_string(std::fmod(c[0], t.L1)) + ", v = " + std::to_string(std::fmod(c[1], t.L2));
  } else if (mesh.is_unit_sphere()) {
    const auto& x = mesh.vertices();
    const Vec3 antipode = -1.0 * x[b.vertex];
    for (std::size_t v = 0; v < x.size(); ++v) truth.distance_[v] = sphere_angle(antipode, x[v]);
    truth.description_ = "antipode of vertex " + std::to_string(b.vertex);
  } else {
    throw UnsupportedSurfaceError("analytic cut locus requires a flat torus or unit sphere");
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Fast marching

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Planar update of x from accepted neighbours A (value a) and B (value b):
// the value d at x such that the linear interpolant over the triangle has
// unit gradient and its characteristic enters x from inside the triangle.
// Falls back to edge-wise Dijkstra for obtuse corners or non-causal fronts.
double triangle_update(const Vec3& e1, double a, const Vec3& e2, double b) {
  const double l1 = norm(e1), l2 = norm(e2);
  const double dijkstra = std::min(a + l1, b + l2);
  const double g11 = dot(e1, e1), g12 = dot(e1, e2), g22 = dot(e2, e2);
  if (g12 < 0.0) return dijkstra;  // obtuse at x
  const double det = g11 * g22 - g12 * g12;
  if (!(det > 0.0)) return dijkstra;
  // Q = G^{-1}
  const double q11 = g22 / det, q12 = -g12 / det, q22 = g11 / det;
  const double s1 = q11 + q12, s2 = q12 + q22;  // Q * 1
  const double qa = s1 + s2;                    // 1^T Q 1
  const double qb = s1 * a + s2 * b;            // 1^T Q v
  const double qc = a * (q11 * a + q12 * b) + b * (q12 * a + q22 * b) - 1.0;
  const double disc = qb * qb - qa * qc;
  if (disc < 0.0) return dijkstra;
  const double d = (qb + std::sqrt(disc)) / qa;
  if (d < std::max(a, b)) return dijkstra;
  // Upwind: -grad d must lie in the cone spanned by e1, e2, i.e. Q t <= 0
  // with t = (a - d, b - d).
  const double t1 = a - d, t2 = b - d;
  const double c1 = q11 * t1 + q12 * t2;
  const double c2 = q12 * t1 + q22 * t2;
  const double slack = 1e-12 * (std::abs(d) + 1.0);
  if (c1 > slack || c2 > slack) return dijkstra;
  return std::min(d, dijkstra);
}

}  // namespace

DistanceField fast_marching(const Mesh& mesh, SourcePoint b, FastMarchingTrace* trace) {
  check_source(mesh, b);
  const std::size_t n = mesh.vertex_count();
  std::vector<double> d(n, kInf);
  std::vector<char> accepted(n, 0), frozen(n, 0);

  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  d[b.vertex] = 0.0;
  frozen[b.vertex] = 1;
  heap.push({0.0, b.vertex});
  for (VertexId nb : mesh.neighbors(b.vertex)) {
    double seed = 0.0;
    if (mesh.is_unit_sphere()) {
      seed = sphere_angle(mesh.vertices()[b.vertex], mesh.vertices()[nb]);
    } else {
      seed = mesh.edge_length(b.vertex, nb);
    }
    d[nb] = seed;
    frozen[nb] = 1;
    heap.push({seed, nb});
  }
  if (trace) {
    trace->order.clear();
    trace->accepted.clear();
  }

  while (!heap.empty()) {
    const auto [value, v] = heap.top();
    heap.pop();
    if (accepted[v] || value > d[v]) continue;
    accepted[v] = 1;
    if (trace) {
      trace->order.push_back(v);
      trace->accepted.push_back(value);
    }
    for (std::uint32_t t : mesh.incident_triangles(v)) {
      const auto& tri = mesh.triangles()[t];
      for (VertexId x : tri) {
        if (x == v || accepted[x] || frozen[x]) continue;
        const VertexId other = tri[0] != v && tri[0] != x ? tri[0] : (tri[1] != v && tri[1] != x ? tri[1] : tri[2]);
        double candidate = d[v] + mesh.edge_length(x, v);
        if (accepted[other]) {
          candidate = std::min(candidate, triangle_update(mesh.edge_vector(x, v), d[v], mesh.edge_vector(x, other), d[other]));
        }
        if (candidate < d[x]) {
          d[x] = candidate;
          heap.push({candidate, x});
        }
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!accepted[v]) throw TopologyError("vertex " + std::to_string(v) + " unreachable from the source");
  }
  // First-order overshoot can exceed the known diameter on coarse grids.
  if (mesh.is_flat_torus() || mesh.is_unit_sphere()) {
    const double cap = diameter_bound(mesh);
    for (double& x : d) x = std::min(x, cap);
  }
  return {ScalarField(mesh, std::move(d)), b, DistanceMethod::fast_marching};
}

}  // namespace cutloc
