#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cutloc/error.hpp"
#include "cutloc/fem.hpp"
#include "cutloc/geodesic.hpp"

using namespace cutloc;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sine_field(const Mesh& mesh) {
  std::vector<double> v(mesh.vertex_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(2 * kPi * mesh.uv()[i][0]);
  return ScalarField(mesh, v);
}

// max |M^-1 L f - 4 pi^2 f| / (4 pi^2)
double eigen_error(int n) {
  const auto mesh = make_flat_torus(1, 1, n, n);
  const auto ops = assemble(mesh);
  const auto f = sine_field(mesh);
  const auto Lf = matvec(ops.stiffness, f.values);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(Lf[i] / ops.mass[i] - 4 * kPi * kPi * f[i]));
  return err / (4 * kPi * kPi);
}

// Stiffness entries straight from the cotangent formula on embedded
// triangles, accumulated into a dense matrix.
std::vector<std::vector<double>> dense_cotan(const Mesh& mesh) {
  const std::size_t n = mesh.vertex_count();
  std::vector<std::vector<double>> K(n, std::vector<double>(n, 0.0));
  for (const auto& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const auto o = t[k], i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      const auto a = mesh.vertices()[i] - mesh.vertices()[o];
      const auto b = mesh.vertices()[j] - mesh.vertices()[o];
      const double cot = dot(a, b) / norm(cross(a, b));
      K[i][j] -= 0.5 * cot;
      K[j][i] -= 0.5 * cot;
      K[i][i] += 0.5 * cot;
      K[j][j] += 0.5 * cot;
    }
  }
  return K;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("stiffness matches a dense cotangent oracle") {
  const auto mesh = make_icosphere(1);
  const auto ops = assemble(mesh);
  const auto K = dense_cotan(mesh);
  double err = 0.0, big = 0.0;
  for (std::size_t i = 0; i < K.size(); ++i) {
    for (std::size_t j = 0; j < K.size(); ++j) {
      err = std::max(err, std::abs(K[i][j] - ops.stiffness.coefficient(i, j)));
      big = std::max(big, std::abs(K[i][j]));
    }
  }
  CHECK(err <= 1e-12 * big);
}

TEST_CASE("kernel, symmetry, mass and positive semidefiniteness") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& mesh : {make_flat_torus(1, 1, 12, 9), make_flat_torus(2, 0.5, 7, 13), make_icosphere(3)}) {
    const auto ops = assemble(mesh);
    const auto& L = ops.stiffness;
    CHECK(L.check_symmetry(1e-12));
    const auto L1 = matvec(L, std::vector<double>(mesh.vertex_count(), 1.0));
    CHECK(max_abs(L1) <= 1e-9 * L.max_abs_entry());
    const auto c = matvec(L, std::vector<double>(mesh.vertex_count(), -3.25));
    CHECK(max_abs(c) <= 1e-9);
    for (double m : ops.mass) CHECK(m > 0.0);
    CHECK(std::abs(ops.total_mass() - mesh.total_area()) <= 1e-9);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(mesh.vertex_count());
      for (auto& v : x) v = u(rng);
      CHECK(dot(x, matvec(L, x)) >= -1e-9);
    }
  }
}

TEST_CASE("torus eigenfunction") {
  const double e32 = eigen_error(32);
  const double e64 = eigen_error(64);
  CHECK(e64 <= 0.05);
  CHECK(e32 / e64 >= 3.0);

  const auto mesh = make_flat_torus(1, 1, 64, 64);
  const auto ops = assemble(mesh);
  const auto f = sine_field(mesh);
  const auto lap = discrete_laplacian(ops, f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lap[i] + 4 * kPi * kPi * f[i]) <= 0.05 * 4 * kPi * kPi);
}

TEST_CASE("sphere mass") {
  const auto ops = assemble(make_icosphere(4));
  CHECK(std::abs(ops.total_mass() - 4 * kPi) <= 0.02 * 4 * kPi);
  CHECK(ops.total_mass() < 4 * kPi);
}

TEST_CASE("energy examples") {
  const auto mesh = make_flat_torus(1, 2, 8, 8);
  const auto ops = assemble(mesh);
  CHECK(energy(ops, ScalarField(mesh, 0.0), 1.0) == 0.0);
  CHECK(energy(ops, ScalarField(mesh, 0.75), 1.0) == doctest::Approx(-0.75 * 2.0).epsilon(1e-12));
  CHECK(energy(ops, ScalarField(mesh, 0.75), 3.0) == doctest::Approx(-3 * 0.75 * 2.0).epsilon(1e-12));
  // gradient term is u^T L u without a factor 1/2
  const auto f = sine_field(mesh);
  CHECK(energy(ops, f, 0.0) == doctest::Approx(dot(f.values, matvec(ops.stiffness, f.values))));
  CHECK_THROWS_AS(energy(ops, ScalarField(make_flat_torus(1, 2, 8, 8), 0.0), 1.0), MeshMismatchError);
}

TEST_CASE("discrete Laplacian sign and constants") {
  const auto mesh = make_icosphere(3);
  const auto ops = assemble(mesh);
  for (double v : discrete_laplacian(ops, ScalarField(mesh, 2.5)).values) CHECK(std::abs(v) <= 1e-9);
  // height z is an eigenfunction with eigenvalue -2
  std::vector<double> z(mesh.vertex_count());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mesh.vertices()[i][2];
  const auto lap = discrete_laplacian(ops, ScalarField(mesh, z));
  CHECK(lap[0] < 0.0);  // north pole is a maximum of z
  double zlz = 0.0, zmz = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    zlz -= z[i] * lap[i] * ops.mass[i];
    zmz += z[i] * z[i] * ops.mass[i];
  }
  CHECK(zlz / zmz == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("sphere: Laplacian of the distance is cot r") {
  for (int k : {4, 5}) {
    const auto mesh = make_icosphere(k);
    const auto ops = assemble(mesh);
    const auto d = analytic_distance(mesh, SourcePoint{0});
    const auto lap = discrete_laplacian(ops, d.field);
    const double tol = std::max(0.05, 10 * mesh.max_edge_length());
    std::size_t checked = 0;
    for (std::size_t i = 0; i < lap.size(); ++i) {
      const double r = d.field[i];
      if (r < 0.5 || r > 2.6) continue;
      ++checked;
      CHECK(std::abs(lap[i] - std::cos(r) / std::sin(r)) <= tol);
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("degenerate triangle") {
  const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 1e-15, 1e-15}};
  const Mesh sliver(v, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
  try {
    assemble(sliver);
    FAIL("expected an assembly error");
  } catch (const AssemblyError& e) {
    CHECK(std::string(e.what()).find("triangle 1") != std::string::npos);
  }
}

}  // TEST_SUITE
