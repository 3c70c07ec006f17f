#include "cutloc/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cutloc/fem.hpp"

namespace cutloc {

namespace {

constexpr int kDimension = 2;

std::string point_str(Vec2 p) {
  std::ostringstream os;
  os << "(" << p[0] << ", " << p[1] << ")";
  return os.str();
}

double laplacian_formula(double C, double B, double vw2) { return 2.0 * kDimension * C - 2.0 * B * vw2; }

}  // namespace

BranchGradients branch_gradients(const Mesh& mesh, SourcePoint b, Vec2 p) {
  check_source(mesh, b);
  const auto& torus = mesh.torus();
  const Vec2 src = mesh.uv()[b.vertex];
  auto translates = torus_minimizing_translates(torus, src, p, 1e-9);
  std::sort(translates.begin(), translates.end());
  if (translates.size() < 2) {
    throw NotACutPointError("point " + point_str(p) + " has a unique minimizing geodesic to the source");
  }
  if (translates.size() > 2) {
    std::string list;
    for (const auto& t : translates) list += " " + point_str(t);
    throw AmbiguousCutPointError("point " + point_str(p) + " has " + std::to_string(translates.size()) +
                                 " minimizing geodesics; translates:" + list);
  }
  BranchGradients g;
  g.translate_v = translates[0];
  g.translate_w = translates[1];
  for (int k = 0; k < 2; ++k) {
    const Vec2 r = p - (src + translates[k]);
    const Vec2 grad = (1.0 / norm(r)) * r;
    (k == 0 ? g.v : g.w) = -1.0 * grad;
  }
  return g;
}

std::vector<Vec2> disk_samples(double radius, std::size_t count) {
  std::vector<Vec2> out;
  out.reserve(count + 1);
  out.push_back({0.0, 0.0});
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double rho = radius * std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(count));
    const double a = golden * static_cast<double>(k);
    out.push_back({rho * std::cos(a), rho * std::sin(a)});
  }
  return out;
}

double BarrierCertificate::phi(Vec2 x) const {
  const double s = dot(v, x) - dot(w, x);
  const double f = 0.5 * (dot(v, x) + dot(w, x)) + B * s * s - distance_at_p;
  return C * dot(x, x) - f;
}

bool BarrierCertificate::valid() const {
  return v != w && laplacian_at_p <= -A && local_min_margin >= -1e-12 && std::abs(value_gap_at_p) <= 1e-12 &&
         subgradient_violation <= 1e-12;
}

BarrierCertificate build_barrier(const Mesh& mesh, SourcePoint b, Vec2 p, double A, const BarrierOptions& options) {
  if (!(A > 0.0) || !std::isfinite(A)) throw ParameterError("barrier target A must be a positive finite number");
  if (!(options.radius > 0.0)) throw ParameterError("barrier sampling radius must be > 0");
  const auto grads = branch_gradients(mesh, b, p);
  const auto& torus = mesh.torus();
  const Vec2 src = mesh.uv()[b.vertex];

  BarrierCertificate cert;
  cert.p = p;
  cert.v = grads.v;
  cert.w = grads.w;
  cert.A = A;
  cert.distance_at_p = torus_distance(torus, src, p);

  // Each smooth branch |x - c| has Hessian <= I / |x - c|, so C|x|^2 minus
  // the branch is convex wherever |x - c| >= 1/(2C). C = 2/d_b(p) + 1 keeps
  // that true on the disk |x| <= d_b(p)/2.
  cert.C = 2.0 / cert.distance_at_p + 1.0;
  const Vec2 vw = cert.v - cert.w;
  const double vw2 = dot(vw, vw);
  cert.B = (2.0 * kDimension * cert.C + A) / (2.0 * vw2);
  // Step B by ulps until the formula evaluates to -A in floating point.
  for (int k = 0; k < 64 && laplacian_formula(cert.C, cert.B, vw2) != -A; ++k) {
    const double lap = laplacian_formula(cert.C, cert.B, vw2);
    cert.B = std::nextafter(cert.B, lap > -A ? std::numeric_limits<double>::infinity() : 0.0);
  }
  cert.laplacian_at_p = laplacian_formula(cert.C, cert.B, vw2);

  // Local validity radius:
  //  - the third-nearest translate must not become minimal inside the disk,
  //  - B((v-w).x)^2 <= |(v-w).x|/2 so that f stays below the max of planes,
  //  - the convexity estimate above needs |x| <= d_b(p)/2.
  double third = std::numeric_limits<double>::infinity();
  {
    std::vector<double> dists;
    const double su = torus.L1 * std::round((p[0] - src[0]) / torus.L1);
    const double sv = torus.L2 * std::round((p[1] - src[1]) / torus.L2);
    for (int i = -2; i <= 2; ++i) {
      for (int j = -2; j <= 2; ++j) dists.push_back(norm(p - (src + Vec2{su + i * torus.L1, sv + j * torus.L2})));
    }
    std::sort(dists.begin(), dists.end());
    third = dists[2];
  }
  double radius = options.radius;
  radius = std::min(radius, 0.45 * (third - cert.distance_at_p));
  radius = std::min(radius, 0.9 / (2.0 * cert.B * std::sqrt(vw2)));
  radius = std::min(radius, 0.5 * cert.distance_at_p);
  if (radius < 1e-4) {
    throw ConstructionError("barrier neighbourhood at " + point_str(p) + " shrank below 1e-4 (radius " +
                            std::to_string(radius) + ")");
  }
  cert.radius = radius;

  cert.value_gap_at_p = cert.phi({0.0, 0.0}) - cert.distance_at_p;
  cert.local_min_margin = std::numeric_limits<double>::infinity();
  cert.subgradient_violation = -std::numeric_limits<double>::infinity();
  const auto xs = disk_samples(radius, options.samples);
  cert.samples = xs.size();
  for (const auto& x : xs) {
    const double dq = torus_distance(torus, src, p + x);
    cert.local_min_margin = std::min(cert.local_min_margin, cert.phi(x) - dq);
    const double convex = cert.C * dot(x, x) - dq;
    cert.subgradient_violation =
        std::max({cert.subgradient_violation, (dot(cert.v, x) - cert.distance_at_p) - convex,
                  (dot(cert.w, x) - cert.distance_at_p) - convex});
  }
  return cert;
}

std::vector<BlowupRow> blowup_probe(const std::vector<Mesh>& levels, SourcePoint b) {
  if (levels.size() < 2) throw ParameterError("blowup probe needs at least two refinement levels");
  std::vector<BlowupRow> rows;
  for (const auto& mesh : levels) {
    if (!mesh.is_flat_torus() && !mesh.is_unit_sphere()) {
      throw UnsupportedSurfaceError("blowup probe requires an analytic surface");
    }
    const auto dist = analytic_distance(mesh, b);
    const auto truth = analytic_cut_locus(mesh, b);
    const auto ops = assemble(mesh);
    const auto lap = discrete_laplacian(ops, dist.field);
    BlowupRow row;
    row.h = mesh.max_edge_length();
    row.vertices = mesh.vertex_count();
    row.min_laplacian = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      if (truth.distance_to_cut(static_cast<VertexId>(i)) <= 2.0 * row.h) {
        ++row.near_cut;
        row.min_laplacian = std::min(row.min_laplacian, lap[i]);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

RadialLaplacianCheck sphere_radial_laplacian(const Mesh& mesh, SourcePoint b, double r_min, double r_max) {
  if (!mesh.is_unit_sphere()) throw UnsupportedSurfaceError("radial Laplacian check needs the unit sphere");
  const auto dist = analytic_distance(mesh, b);
  const auto ops = assemble(mesh);
  const auto lap = discrete_laplacian(ops, dist.field);
  RadialLaplacianCheck c;
  c.h = mesh.max_edge_length();
  c.tolerance = std::max(0.05, 10.0 * c.h);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const double r = dist.field[i];
    if (r < r_min || r > r_max) continue;
    ++c.checked;
    c.max_error = std::max(c.max_error, std::abs(lap[i] - std::cos(r) / std::sin(r)));
  }
  return c;
}

}  // namespace cutloc
