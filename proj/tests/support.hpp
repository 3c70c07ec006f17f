#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>

#include "cutloc/fem.hpp"
#include "cutloc/geodesic.hpp"
#include "cutloc/obstacle.hpp"

namespace testing_support {

// Mesh, distance, operators and problem kept together so the problem's
// operator pointer stays valid.
struct Instance {
  cutloc::Mesh mesh;
  cutloc::DistanceField distance;
  cutloc::FemOperators ops;
  std::unique_ptr<cutloc::ObstacleProblem> problem;

  Instance(cutloc::Mesh m, double load, cutloc::VertexId source = 0)
      : mesh(std::move(m)),
        distance(cutloc::analytic_distance(mesh, cutloc::SourcePoint{source})),
        ops(cutloc::assemble(mesh)),
        problem(std::make_unique<cutloc::ObstacleProblem>(ops, distance.field, load)) {}
};

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

inline double max_norm(std::span<const double> a) {
  double e = 0.0;
  for (double v : a) e = std::max(e, std::abs(v));
  return e;
}

}  // namespace testing_support
