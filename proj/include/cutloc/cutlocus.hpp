#pragma once

#include <optional>
#include <vector>

#include "cutloc/geodesic.hpp"
#include "cutloc/obstacle.hpp"

namespace cutloc {

// Non-contact set {d - u > theta} scored against the analytic cut locus.
struct CutLocusReport {
  std::vector<char> noncontact;
  double theta = 0.0;
  double band = 0.0;  // vertices with distance-to-cut <= band count as "on the cut locus"
  std::size_t noncontact_count = 0;
  bool scored = false;  // false on generic meshes (no ground truth)
  std::size_t cut_vertex_count = 0;
  double coverage = 0.0;
  double excess_radius = 0.0;
  double min_gap_on_cut = 0.0;

  // Inclusion holds at this resolution: strictly positive gap on every cut
  // vertex and all of them flagged.
  bool inclusion_holds() const { return scored && min_gap_on_cut > 0.0 && coverage == 1.0; }
};

double default_theta(const SolverConfig& config);

// `band` defaults to the maximum edge length h of the mesh.
CutLocusReport detect(const Mesh& mesh, const ScalarField& u, const DistanceField& distance,
                      const CutLocusTruth* truth, double theta, std::optional<double> band = std::nullopt);

inline CutLocusReport detect(const Mesh& mesh, const ObstacleSolution& solution, const DistanceField& distance,
                             const CutLocusTruth* truth, double theta, std::optional<double> band = std::nullopt) {
  return detect(mesh, solution.u, distance, truth, theta, band);
}

}  // namespace cutloc
