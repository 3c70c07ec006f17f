#include "cutloc/fem.hpp"

#include <algorithm>
#include <string>

#include "cutloc/error.hpp"

namespace cutloc {

double FemOperators::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

double FemOperators::max_mass() const { return *std::max_element(mass.begin(), mass.end()); }

FemOperators assemble(const Mesh& mesh) {
  const std::size_t nt = mesh.triangle_count();
  std::vector<double> area(nt);
  double mean_area = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    area[t] = mesh.triangle_area(t);
    mean_area += area[t];
  }
  mean_area /= static_cast<double>(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    if (area[t] < 1e-14 * mean_area) {
      throw AssemblyError("degenerate triangle " + std::to_string(t) + " (area " + std::to_string(area[t]) + ")");
    }
  }

  FemOperators ops;
  ops.mesh_id = mesh.id();
  ops.mass.assign(mesh.vertex_count(), 0.0);

  std::vector<Triplet> triplets;
  triplets.reserve(12 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int k = 0; k < 3; ++k) {
      // Corner k is opposite edge (i, j).
      const VertexId c = tri[k], i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Vec3 ei = mesh.edge_vector(c, i);
      const Vec3 ej = mesh.edge_vector(c, j);
      const double cot = dot(ei, ej) / norm(cross(ei, ej));
      const double w = 0.5 * cot;
      triplets.push_back({i, j, -w});
      triplets.push_back({j, i, -w});
      triplets.push_back({i, i, w});
      triplets.push_back({j, j, w});
      ops.mass[c] += area[t] / 3.0;
    }
  }
  ops.stiffness = SparseOperator::from_triplets(mesh.vertex_count(), std::move(triplets), true);
  return ops;
}

void check_same_mesh(const ScalarField& field, const FemOperators& ops) {
  if (field.mesh_id != ops.mesh_id || field.size() != ops.mass.size()) throw MeshMismatchError();
}

double energy(const FemOperators& ops, const ScalarField& u, double m) {
  check_same_mesh(u, ops);
  const auto Lu = matvec(ops.stiffness, u.values);
  double grad = 0.0, load = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    grad += u[i] * Lu[i];
    load += ops.mass[i] * u[i];
  }
  return grad - m * load;
}

ScalarField discrete_laplacian(const FemOperators& ops, const ScalarField& u) {
  check_same_mesh(u, ops);
  const auto Lu = matvec(ops.stiffness, u.values);
  ScalarField out = u;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = -Lu[i] / ops.mass[i];
  return out;
}

}  // namespace cutloc
