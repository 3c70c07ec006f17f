#pragma once

#include <string>
#include <vector>

#include "cutloc/cutlocus.hpp"
#include "cutloc/fem.hpp"
#include "cutloc/geodesic.hpp"
#include "cutloc/obstacle.hpp"

namespace cutloc {

// Smoothed obstacle  d~ = (1 - rho) d_b + rho d_eps, where d_eps is a
// smoothing of d_b - eps/2 and rho is a bump equal to 1 on the cut locus and
// supported inside {u_m < d_b - eps} away from b.
struct SmoothedObstacle {
  ScalarField field;
  double epsilon = 0.0;
  ScalarField rho;
  ScalarField mollified;
  double near_b_radius = 0.0;
  double sigma = 0.0;  // support radius of rho measured from the cut locus
  double band = 0.0;   // rho == 1 on vertices within `band` of the cut locus
  std::vector<double> cut_distance;  // per-vertex distance used to build rho
  int passes = 0;
  double mollify_deviation = 0.0;  // ||d_eps - (d_b - eps/2)||_inf
};

struct SmoothedInvariants {
  bool between_u_and_d = false;       // u - 1e-9 <= d~ <= d + 1e-12
  bool equal_near_b = false;          // d~ == d_b within near_b_radius
  bool strictly_below_on_cut = false; // d~ < d_b within band of the cut locus
  bool rho_range = false;             // rho in [0,1], 1 on cut, 0 off {u < d - eps} and near b
  bool mollify_bound = false;         // deviation <= 0.49 eps
  bool blend_bounds = false;          // min(d, d_eps) <= d~ <= max(d, d_eps)
  std::vector<std::string> failures;
  bool all() const { return failures.empty(); }
};

struct CreaseMetrics {
  double max_second_difference = 0.0;     // over vertices outside the near-b ball
  double median_away_from_cut = 0.0;      // over vertices outside supp(rho) and the near-b ball
  double ratio() const { return median_away_from_cut > 0.0 ? max_second_difference / median_away_from_cut : 0.0; }
};

// eps = (1/2) min over cut-locus vertices of (d - u). On a generic mesh
// (truth == nullptr) eps = (1/4) max (d - u). Throws ConstructionError if the
// gap is not strictly positive.
double choose_epsilon(const Mesh& mesh, const ScalarField& u, const DistanceField& distance,
                      const CutLocusTruth* truth);

// Repeated mass-weighted one-ring averaging of d_b - eps/2, then pulled back
// toward d_b - eps/2 so the deviation is at most 0.49 eps.
ScalarField mollify(const Mesh& mesh, const FemOperators& ops, const DistanceField& distance, double epsilon,
                    int passes);

// (1 - rho) d + rho d_eps
ScalarField blend(const ScalarField& d, const ScalarField& rho, const ScalarField& mollified);

// |f_i - mean of f over the one-ring of i|
std::vector<double> second_differences(const Mesh& mesh, const ScalarField& f);

SmoothedObstacle build_smoothed(const Mesh& mesh, const FemOperators& ops, const ScalarField& u,
                                const DistanceField& distance, const CutLocusTruth* truth, int passes = 20);

SmoothedInvariants check_invariants(const SmoothedObstacle& s, const ScalarField& u, const DistanceField& distance);

CreaseMetrics crease_metrics(const Mesh& mesh, const SmoothedObstacle& s, const DistanceField& distance,
                             const ScalarField& field);

struct EquivalenceResult {
  double discrepancy = 0.0;  // ||u_smoothed - u_original||_inf
  ObstacleSolution original;
  ObstacleSolution smoothed;
};

// Solves the problem again with `obstacle` in place of the original one and
// compares the minimizers.
EquivalenceResult verify_equivalence(const ObstacleProblem& original, const ScalarField& obstacle,
                                     const SolverConfig& config);

inline EquivalenceResult verify_equivalence(const ObstacleProblem& original, const SmoothedObstacle& smoothed,
                                            const SolverConfig& config) {
  return verify_equivalence(original, smoothed.field, config);
}

}  // namespace cutloc
