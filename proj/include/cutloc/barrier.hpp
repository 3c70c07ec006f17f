#pragma once

#include <cstddef>
#include <vector>

#include "cutloc/error.hpp"
#include "cutloc/geodesic.hpp"

namespace cutloc {

class NotACutPointError : public ConstructionError {
 public:
  using ConstructionError::ConstructionError;
};

class AmbiguousCutPointError : public ConstructionError {
 public:
  using ConstructionError::ConstructionError;
};

// Negated gradients of the two distance branches meeting at a cut point p of
// the flat torus, ordered by their lattice translate (lexicographic).
// Both are subgradients at 0 of x -> C|x|^2 - d_b(p + x).
struct BranchGradients {
  Vec2 v{};
  Vec2 w{};
  Vec2 translate_v{};
  Vec2 translate_w{};
};

BranchGradients branch_gradients(const Mesh& mesh, SourcePoint b, Vec2 p);

struct BarrierOptions {
  double radius = 0.05;
  std::size_t samples = 10000;
};

// Upper barrier for d_b at a two-geodesic cut point p of the flat torus,
// written in the uv chart centred at p (globally Euclidean normal
// coordinates):
//
//   f(x)   = (v.x + w.x)/2 + B ((v - w).x)^2 - d_b(p)
//   phi(x) = C |x|^2 - f(x)
//
// phi >= d_b near p, phi(0) = d_b(p) and Lap phi(p) = 2nC - 2B|v - w|^2 = -A.
struct BarrierCertificate {
  Vec2 p{};
  Vec2 v{};
  Vec2 w{};
  double C = 0.0;
  double B = 0.0;
  double A = 0.0;
  double distance_at_p = 0.0;
  double laplacian_at_p = 0.0;
  double value_gap_at_p = 0.0;         // phi(p) - d_b(p)
  double local_min_margin = 0.0;       // min over samples of phi - d_b
  double subgradient_violation = 0.0;  // max over samples and {v, w} of plane - convex function
  double radius = 0.0;
  std::size_t samples = 0;

  double phi(Vec2 x) const;
  bool valid() const;
};

BarrierCertificate build_barrier(const Mesh& mesh, SourcePoint b, Vec2 p, double A, const BarrierOptions& options = {});

// Quasi-uniform points in the disk of radius r around the origin (Vogel
// spiral), origin first.
std::vector<Vec2> disk_samples(double radius, std::size_t count);

struct BlowupRow {
  double h = 0.0;
  std::size_t vertices = 0;
  std::size_t near_cut = 0;
  double min_laplacian = 0.0;
};

// Minimum of the discrete Laplacian of the analytic d_b over vertices within
// 2h of the cut locus, one row per refinement level.
std::vector<BlowupRow> blowup_probe(const std::vector<Mesh>& levels, SourcePoint b);

struct RadialLaplacianCheck {
  double h = 0.0;
  std::size_t checked = 0;
  double max_error = 0.0;  // max |Lap d_b - cot d_b| over vertices with d_b in [r_min, r_max]
  double tolerance = 0.0;  // max(0.05, 10 h)
  bool passed() const { return checked > 0 && max_error <= tolerance; }
};

// Unit sphere only: compares the discrete Laplacian of the analytic d_b with
// the exact value cot(d_b).
RadialLaplacianCheck sphere_radial_laplacian(const Mesh& mesh, SourcePoint b, double r_min = 0.5, double r_max = 2.6);

}  // namespace cutloc
