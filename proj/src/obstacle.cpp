#include "cutloc/obstacle.hpp"

#include <algorithm>
#include <cmath>

#include "cutloc/error.hpp"

namespace cutloc {

ObstacleProblem::ObstacleProblem(const FemOperators& operators, ScalarField obstacle_field, double load)
    : ops(&operators), obstacle(std::move(obstacle_field)), m(load) {
  check_same_mesh(obstacle, operators);
  if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("load m must be a positive finite number");
  for (double d : obstacle.values) {
    if (!std::isfinite(d)) throw ParameterError("obstacle has a non-finite value");
  }
}

void SolverConfig::validate() const {
  if (!(omega > 0.0 && omega < 2.0)) throw ParameterError("omega must lie in (0, 2)");
  if (!(tol_update > 0.0)) throw ParameterError("tol_update must be > 0");
  if (!(tol_kkt > 0.0)) throw ParameterError("tol_kkt must be > 0");
  if (!(tol_act_rel > 0.0)) throw ParameterError("tol_act must be > 0");
  if (max_sweeps <= 0) throw ParameterError("max_sweeps must be > 0");
  if (kkt_check_interval <= 0) throw ParameterError("kkt_check_interval must be > 0");
}

double KktReport::residual() const { return std::max(max_abs_g_inactive, max_g_active) / scale; }

std::vector<char> classify_active(const ObstacleProblem& problem, std::span<const double> u, double tol_act_rel) {
  const auto& d = problem.obstacle.values;
  std::vector<char> active(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) active[i] = u[i] >= d[i] - tol_act_rel * (1.0 + std::abs(d[i]));
  return active;
}

KktReport kkt_report(const ObstacleProblem& problem, const ScalarField& u, double tol_act_rel) {
  check_same_mesh(u, *problem.ops);
  const auto& ops = *problem.ops;
  const auto& d = problem.obstacle.values;
  const auto Lu = matvec(ops.stiffness, u.values);
  const auto active = classify_active(problem, u.values, tol_act_rel);
  KktReport r;
  r.scale = problem.m * ops.max_mass();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double g = 2.0 * Lu[i] - problem.m * ops.mass[i];
    if (active[i]) {
      ++r.active_count;
      r.max_g_active = std::max(r.max_g_active, g);
    } else {
      r.max_abs_g_inactive = std::max(r.max_abs_g_inactive, std::abs(g));
    }
    r.feasibility_violation = std::max(r.feasibility_violation, u[i] - d[i]);
    r.complementarity += (d[i] - u[i]) * std::max(-g, 0.0);
  }
  return r;
}

namespace {

void finalize(const ObstacleProblem& problem, ObstacleSolution& sol, double tol_act_rel) {
  sol.kkt = kkt_report(problem, sol.u, tol_act_rel);
  sol.kkt_residual = sol.kkt.residual();
  sol.active = classify_active(problem, sol.u.values, tol_act_rel);
  sol.energy = energy(*problem.ops, sol.u, problem.m);
}

}  // namespace

ObstacleSolution solve(const ObstacleProblem& problem, const SolverConfig& config,
                       const std::optional<ScalarField>& initial) {
  config.validate();
  const auto& ops = *problem.ops;
  const auto& L = ops.stiffness;
  const auto& d = problem.obstacle.values;
  const std::size_t n = d.size();
  const double m = problem.m;

  ObstacleSolution sol;
  sol.u = problem.obstacle;
  if (initial) {
    check_same_mesh(*initial, ops);
    for (std::size_t i = 0; i < n; ++i) {
      if ((*initial)[i] > d[i]) throw ParameterError("initial iterate violates the obstacle at vertex " + std::to_string(i));
    }
    sol.u.values = initial->values;
  }
  auto& u = sol.u.values;

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = L.diagonal(i);
    if (!(diag[i] > 0.0)) throw AssemblyError("non-positive stiffness diagonal at vertex " + std::to_string(i));
  }
  const double energy_scale = m * ops.total_mass();

  for (long sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // dE/du_i = 2 (L u)_i - m m_i, curvature 2 L_ii along the coordinate.
      const double g = 2.0 * L.row_dot(i, u) - m * ops.mass[i];
      const double gs = u[i] - g / (2.0 * diag[i]);
      const double next = std::min(u[i] + config.omega * (gs - u[i]), d[i]);
      const double delta = next - u[i];
      // Exact energy change of the coordinate move.
      const double dE = delta * g + diag[i] * delta * delta;
      if (dE > 0.0) sol.max_energy_increase = std::max(sol.max_energy_increase, dE / energy_scale);
      u[i] = next;
      max_update = std::max(max_update, std::abs(delta));
    }
    sol.iterations = sweep;
    sol.last_update = max_update;
    if (config.on_sweep) config.on_sweep(sweep, u);
    if (max_update <= config.tol_update && sweep % config.kkt_check_interval == 0) {
      const auto kkt = kkt_report(problem, sol.u, config.tol_act_rel);
      if (kkt.residual() <= config.tol_kkt) {
        sol.converged = true;
        break;
      }
    }
  }
  finalize(problem, sol, config.tol_act_rel);
  if (!sol.converged) {
    throw SolverFailure("projected SOR did not converge in " + std::to_string(config.max_sweeps) +
                            " sweeps (last update " + std::to_string(sol.last_update) + ", KKT residual " +
                            std::to_string(sol.kkt_residual) + ")",
                        sol);
  }
  return sol;
}

ObstacleSolution oracle_solve(const ObstacleProblem& problem, double tol, long max_iter) {
  const auto& ops = *problem.ops;
  const auto& L = ops.stiffness;
  const auto& d = problem.obstacle.values;
  const std::size_t n = d.size();
  if (n > 2000) throw ParameterError("oracle_solve is limited to 2000 vertices (got " + std::to_string(n) + ")");
  if (!(tol > 0.0)) throw ParameterError("oracle tolerance must be > 0");

  // Gershgorin bound on the spectrum of M^{-1} L.
  double lambda_max = 0.0;
  const auto offsets = L.row_offsets();
  const auto values = L.values();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (auto k = offsets[i]; k < offsets[i + 1]; ++k) row += std::abs(values[k]);
    lambda_max = std::max(lambda_max, row / ops.mass[i]);
  }
  // The gradient of the energy in the M-metric is 2 M^{-1} L u - m, whose
  // Lipschitz constant is 2 * lambda_max.
  const double step = 1.0 / (2.0 * lambda_max);

  ObstacleSolution sol;
  sol.u = problem.obstacle;
  auto& u = sol.u.values;
  std::vector<double> next(n);
  for (long it = 1; it <= max_iter; ++it) {
    const auto Lu = matvec(L, u);
    double max_update = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double grad = 2.0 * Lu[i] / ops.mass[i] - problem.m;
      next[i] = std::min(u[i] - step * grad, d[i]);
      max_update = std::max(max_update, std::abs(next[i] - u[i]));
    }
    u.swap(next);
    sol.iterations = it;
    sol.last_update = max_update;
    if (max_update <= tol) {
      sol.converged = true;
      break;
    }
  }
  finalize(problem, sol, 1e-10);
  if (!sol.converged) throw SolverFailure("oracle projected gradient did not converge", sol);
  return sol;
}

}  // namespace cutloc
