#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutloc/error.hpp"
#include "cutloc/fem.hpp"
#include "cutloc/mesh.hpp"

namespace cutloc {

// Discrete obstacle problem
//
//   minimize  u^T L u - m * sum_i m_i u_i   subject to  u_i <= d_i.
//
// With g = 2 L u - m * mass, a minimizer satisfies g_i = 0 where u_i < d_i
// and g_i <= 0 where u_i = d_i (the discrete form of Lap u >= -m).
struct ObstacleProblem {
  const FemOperators* ops = nullptr;  // not owned; must outlive the problem
  ScalarField obstacle;
  double m = 1.0;

  ObstacleProblem(const FemOperators& operators, ScalarField obstacle_field, double load);
};

struct SolverConfig {
  double omega = 1.5;
  double tol_update = 1e-11;
  double tol_kkt = 1e-8;
  double tol_act_rel = 1e-10;  // vertex active when u_i >= d_i - tol_act_rel * (1 + |d_i|)
  long max_sweeps = 200000;
  // How often (in sweeps) the full KKT residual is evaluated once the update
  // criterion holds.
  int kkt_check_interval = 1;
  // Called after every sweep with (sweep index, current iterate); lets tests
  // observe the iteration without the solver paying for it.
  std::function<void(long, std::span<const double>)> on_sweep;

  void validate() const;
};

struct KktReport {
  double max_abs_g_inactive = 0.0;
  double max_g_active = 0.0;  // positive part only; 0 when the sign condition holds
  double feasibility_violation = 0.0;
  double complementarity = 0.0;  // sum_i (d_i - u_i) * max(-g_i, 0)
  double scale = 1.0;            // m * max_i m_i
  std::size_t active_count = 0;

  // max(max|g| inactive, max g active) / scale
  double residual() const;
};

struct ObstacleSolution {
  ScalarField u;
  std::vector<char> active;
  long iterations = 0;
  double kkt_residual = 0.0;
  double energy = 0.0;
  double last_update = 0.0;
  double max_energy_increase = 0.0;  // largest uphill step observed by the sweep
  bool converged = false;
  KktReport kkt;
};

// Thrown when the solver runs out of sweeps; carries the last state.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, ObstacleSolution last)
        : Error(what), last_(std::move(last)) {}
  const ObstacleSolution& last() const { return last_; }

 private:
  ObstacleSolution last_;
};

// Projected SOR in ascending vertex order. Starts from `initial` when given
// (must be feasible), otherwise from the obstacle.
ObstacleSolution solve(const ObstacleProblem& problem, const SolverConfig& config,
                       const std::optional<ScalarField>& initial = std::nullopt);

// Independent reference solver: projected gradient in the lumped-mass metric
// with fixed step 1 / (2 * lambda_max), lambda_max bounded by Gershgorin on
// M^{-1} L. Only for small meshes (<= 2000 vertices).
ObstacleSolution oracle_solve(const ObstacleProblem& problem, double tol, long max_iter = 50'000'000);

std::vector<char> classify_active(const ObstacleProblem& problem, std::span<const double> u, double tol_act_rel);
KktReport kkt_report(const ObstacleProblem& problem, const ScalarField& u, double tol_act_rel = 1e-10);

}  // namespace cutloc
