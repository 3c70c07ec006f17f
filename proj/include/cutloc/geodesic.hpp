#pragma once

#include <string>
#include <vector>

#include "cutloc/mesh.hpp"

namespace cutloc {

enum class DistanceMethod { fast_marching, analytic };

std::string method_name(DistanceMethod m);

// d_b sampled at the vertices.
struct DistanceField {
  ScalarField field;
  SourcePoint source;
  DistanceMethod method = DistanceMethod::analytic;
};

// Ground-truth cut locus of the source on an analytic surface, stored as the
// intrinsic distance from every vertex to the cut locus set.
//   flat torus: the cross {u = b1 + L1/2} U {v = b2 + L2/2} (mod periods)
//   unit sphere: the antipode of b
class CutLocusTruth {
 public:
  MeshId mesh_id() const { return mesh_id_; }
  const std::vector<double>& distances() const { return distance_; }
  double distance_to_cut(VertexId v) const { return distance_[v]; }
  const std::string& description() const { return description_; }

 private:
  friend CutLocusTruth analytic_cut_locus(const Mesh& mesh, SourcePoint b);
  MeshId mesh_id_ = 0;
  std::vector<double> distance_;
  std::string description_;
};

// Exact flat-torus distance: minimum over the 9 nearest lattice translates.
double torus_distance(const FlatTorus& torus, Vec2 b, Vec2 p);

// Lattice translates t (with b + t closest to p) whose distance to p is within
// `tol` of the minimum, taken from the 9-translate window.
std::vector<Vec2> torus_minimizing_translates(const FlatTorus& torus, Vec2 b, Vec2 p, double tol = 1e-9);

// Distance from p to the torus cut locus of b.
double torus_cut_distance(const FlatTorus& torus, Vec2 b, Vec2 p);

DistanceField analytic_distance(const Mesh& mesh, SourcePoint b);
CutLocusTruth analytic_cut_locus(const Mesh& mesh, SourcePoint b);

// Upper bound on d_b for the analytic surfaces (half diagonal / pi).
double diameter_bound(const Mesh& mesh);

struct FastMarchingTrace {
  std::vector<VertexId> order;
  std::vector<double> accepted;
};

// First-order fast marching on the triangle mesh. The source is exact zero
// and its one-ring is seeded with the analytic (Euclidean / spherical)
// distance. Optionally records the acceptance order.
DistanceField fast_marching(const Mesh& mesh, SourcePoint b, FastMarchingTrace* trace = nullptr);

}  // namespace cutloc
