#pragma once

#include <vector>

#include "cutloc/mesh.hpp"
#include "cutloc/sparse.hpp"

namespace cutloc {

// P1 cotangent stiffness and lumped mass of a closed mesh.
//
//   u^T L u      ~  integral of |grad u|^2
//   sum_i m_i u_i ~  integral of u
//
// L is symmetric positive semidefinite with constants in its kernel.
struct FemOperators {
  SparseOperator stiffness;
  std::vector<double> mass;
  MeshId mesh_id = 0;

  double total_mass() const;
  double max_mass() const;
};

// Throws AssemblyError for a triangle whose area is below 1e-14 of the mean.
FemOperators assemble(const Mesh& mesh);

// u^T L u - m * sum_i m_i u_i  (no factor 1/2 on the gradient term).
double energy(const FemOperators& ops, const ScalarField& u, double m);

// Discrete Laplace-Beltrami: -(L u)_i / m_i. Negative on concave bumps.
ScalarField discrete_laplacian(const FemOperators& ops, const ScalarField& u);

void check_same_mesh(const ScalarField& field, const FemOperators& ops);

}  // namespace cutloc
