#pragma once

// Exact infinite-horizon costs, the decentralized optimality gap and the
// geometric-decay certificate for it.
//
// With z = [x; x~] and z(k+1) = Abar z(k), the decentralized cost from step s
// is x(s)'P x(s) + sum_{k>=s} z(k)' W z(k) where
//
//   W  = [[0, S1], [S1', S2]],
//   S1 = (A + BK)' P C - [K_1'R_1K_1 ... K_r'R_rK_r],
//   S2 = blkdiag(K_i' R_i K_i) + C' P C,        C = [-B_1K_1 ... -B_rK_r].
//
// The sum is evaluated as z(s)' X z(s) with X = Abar' X Abar + W.

#include <cmath>
#include <string>
#include <vector>

#include "declq/linalg.hpp"
#include "declq/model.hpp"
#include "declq/observers.hpp"
#include "declq/riccati.hpp"
#include "declq/sim.hpp"

namespace declq {

struct GapWeights {
  Matrix S1;  ///< n x (r n)
  Matrix S2;  ///< (r n) x (r n)
  Matrix W;   ///< ((r+1) n) x ((r+1) n)
};

struct DecentralizedCost {
  double J_opt = 0.0;  ///< x(s)' P x(s)
  double J_dec = 0.0;
  double gap = 0.0;    ///< J_dec - J_opt
};

struct CostReport {
  double J_opt = 0.0;
  double J_dec = 0.0;
  double gap = 0.0;
  double augmented_radius = 0.0;  ///< rho(Abar)
  double lambda = 0.0;            ///< decay rate, (rho(Abar) + 1) / 2
  double c = 1.0;                 ///< sup_k ||Abar^k|| / lambda^k
  double W_norm = 0.0;
  double c_bar = 0.0;             ///< ||W|| ||z0||^2 c^2 / (1 - lambda^2)
  double epsilon = 0.0;
  int N_eps = 0;                  ///< smallest N with c_bar lambda^{2N} < epsilon
  double bound_at_N = 0.0;        ///< c_bar lambda^{2 N_eps}
  double gap_at_N = 0.0;          ///< exact tail gap from step N_eps
  bool certified = false;         ///< gap_at_N < epsilon
};

namespace detail {

inline Matrix block_gain_weights(const PlantModel& plant, const RiccatiSolution& sol,
                                 bool diagonal) {
  const Eigen::Index n = plant.states();
  const auto r = static_cast<Eigen::Index>(plant.agents());
  Matrix out = diagonal ? Matrix::Zero(r * n, r * n) : Matrix::Zero(n, r * n);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Matrix krk = sol.K_parts[ui].transpose() * plant.R[ui] * sol.K_parts[ui];
    if (diagonal) {
      out.block(i * n, i * n, n, n) = krk;
    } else {
      out.middleCols(i * n, n) = krk;
    }
  }
  return out;
}

inline Vector stack_augmented(const Vector& x, const std::vector<Vector>& xhat) {
  const Eigen::Index n = x.size();
  Vector z(n * static_cast<Eigen::Index>(xhat.size() + 1));
  z.head(n) = x;
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    if (xhat[i].size() != n) throw DimensionError("estimate has the wrong size");
    z.segment(n * static_cast<Eigen::Index>(i + 1), n) = x - xhat[i];
  }
  return z;
}

inline void require_stable_augmented(const ObserverScheme& scheme, const char* who) {
  const double rho = spectral_radius(scheme.augmented_matrix);
  if (rho >= 1.0) {
    throw InstabilityError(std::string(who) + ": augmented closed loop is not Schur-stable (rho = " +
                               std::to_string(rho) + ")",
                           rho);
  }
}

}  // namespace detail

[[nodiscard]] inline GapWeights gap_weights(const PlantModel& plant, const RiccatiSolution& sol) {
  detail::require_solution(plant, sol, "gap_weights");
  const Matrix coupling = coupling_matrix(plant, sol);
  const Matrix closed = closed_loop_matrix(plant, sol);
  const Eigen::Index n = plant.states();
  const Eigen::Index rn = coupling.cols();

  GapWeights out;
  out.S1 = closed.transpose() * sol.P * coupling - detail::block_gain_weights(plant, sol, false);
  out.S2 = detail::block_gain_weights(plant, sol, true) + coupling.transpose() * sol.P * coupling;
  out.S2 = 0.5 * (out.S2 + out.S2.transpose());
  out.W = Matrix::Zero(n + rn, n + rn);
  out.W.topRightCorner(n, rn) = out.S1;
  out.W.bottomLeftCorner(rn, n) = out.S1.transpose();
  out.W.bottomRightCorner(rn, rn) = out.S2;
  return out;
}

/// Stage cost as a quadratic form in z = [x; x~]:
/// [[Q + K'RK, -T], [-T', blkdiag(K_i'R_iK_i)]], T = [K_1'R_1K_1 ... K_r'R_rK_r].
[[nodiscard]] inline Matrix stage_weights(const PlantModel& plant, const RiccatiSolution& sol) {
  detail::require_solution(plant, sol, "stage_weights");
  const Eigen::Index n = plant.states();
  const Matrix cross = detail::block_gain_weights(plant, sol, false);
  const Matrix diag = detail::block_gain_weights(plant, sol, true);
  const Eigen::Index rn = diag.rows();
  Matrix g(n + rn, n + rn);
  Matrix top = plant.Q;
  for (Eigen::Index i = 0; i < cross.cols() / n; ++i) top += cross.middleCols(i * n, n);
  g.topLeftCorner(n, n) = top;
  g.topRightCorner(n, rn) = -cross;
  g.bottomLeftCorner(rn, n) = -cross.transpose();
  g.bottomRightCorner(rn, rn) = diag;
  return g;
}

/// X with X = Abar' X Abar + W; the gap from state z is z' X z.
[[nodiscard]] inline Matrix gap_lyapunov(const PlantModel& plant, const RiccatiSolution& sol,
                                         const ObserverScheme& scheme) {
  detail::require_stable_augmented(scheme, "gap_lyapunov");
  return solve_dlyap(scheme.augmented_matrix, gap_weights(plant, sol).W);
}

/// Exact J_opt = x'Px, J_dec and their gap from state x with estimates xhat.
[[nodiscard]] inline DecentralizedCost exact_decentralized_cost(const PlantModel& plant,
                                                                const RiccatiSolution& sol,
                                                                const ObserverScheme& scheme,
                                                                const Vector& x,
                                                                const std::vector<Vector>& xhat) {
  if (xhat.size() != plant.agents()) {
    throw DimensionError("exact_decentralized_cost: expected " + std::to_string(plant.agents()) +
                         " estimates");
  }
  const Matrix lyap = gap_lyapunov(plant, sol, scheme);
  const Vector z = detail::stack_augmented(x, xhat);
  DecentralizedCost out;
  out.J_opt = optimal_cost(sol, x);
  out.gap = z.dot(lyap * z);
  out.J_dec = out.J_opt + out.gap;
  return out;
}

/// sum_{k=s}^{M} x'Qx + sum_i u_i'R_iu_i over a recorded trace.
[[nodiscard]] inline double trajectory_cost(const SimTrace& trace, int s, int m) {
  if (s < 0 || m < s || static_cast<std::size_t>(m) >= trace.stage_cost.size()) {
    throw RangeError("trajectory_cost: range [" + std::to_string(s) + ", " + std::to_string(m) +
                     "] outside recorded stage costs [0, " +
                     std::to_string(static_cast<long>(trace.stage_cost.size()) - 1) + "]");
  }
  double sum = 0.0;
  for (int k = s; k <= m; ++k) sum += trace.stage_cost[static_cast<std::size_t>(k)];
  return sum;
}

/// Smallest N >= 0 with c_bar lambda^{2N} < epsilon.
[[nodiscard]] inline int horizon_for_epsilon(double c_bar, double lambda, double epsilon) {
  if (c_bar < epsilon) return 0;
  auto bound = [&](int n) { return c_bar * std::pow(lambda, 2.0 * n); };
  int n = static_cast<int>(std::ceil(std::log(epsilon / c_bar) / (2.0 * std::log(lambda))));
  n = std::max(n, 0);
  while (bound(n) >= epsilon) ++n;
  while (n > 0 && bound(n - 1) < epsilon) --n;
  return n;
}

/// Decay constants and the epsilon-horizon for the gap, with the exact tail
/// gap from step N_eps for comparison.
[[nodiscard]] inline CostReport optimality_certificate(const PlantModel& plant,
                                                       const RiccatiSolution& sol,
                                                       const ObserverScheme& scheme,
                                                       const Vector& x0,
                                                       const std::vector<Vector>& xhat0,
                                                       double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("optimality_certificate: epsilon must be positive");
  if (xhat0.size() != plant.agents()) {
    throw DimensionError("optimality_certificate: expected " + std::to_string(plant.agents()) +
                         " estimates");
  }
  const Matrix& abar = scheme.augmented_matrix;
  CostReport rep;
  rep.augmented_radius = spectral_radius(abar);
  if (rep.augmented_radius >= 1.0) {
    throw InstabilityError("optimality_certificate: augmented closed loop is not Schur-stable",
                           rep.augmented_radius);
  }
  const Matrix w = gap_weights(plant, sol).W;
  const Matrix lyap = solve_dlyap(abar, w);
  const Vector z0 = detail::stack_augmented(x0, xhat0);

  rep.J_opt = optimal_cost(sol, x0);
  rep.gap = z0.dot(lyap * z0);
  rep.J_dec = rep.J_opt + rep.gap;

  rep.lambda = 0.5 * (rep.augmented_radius + 1.0);
  rep.c = transient_growth_constant(abar, rep.lambda);
  rep.W_norm = norm2(w);
  rep.c_bar = rep.W_norm * z0.squaredNorm() * rep.c * rep.c / (1.0 - rep.lambda * rep.lambda);
  rep.epsilon = epsilon;
  rep.N_eps = horizon_for_epsilon(rep.c_bar, rep.lambda, epsilon);
  rep.bound_at_N = rep.c_bar * std::pow(rep.lambda, 2.0 * rep.N_eps);

  const Vector zn = matrix_power(abar, static_cast<unsigned>(rep.N_eps)) * z0;
  rep.gap_at_N = zn.dot(lyap * zn);
  rep.certified = rep.gap_at_N < epsilon;
  return rep;
}

/// c_bar lambda^{2s}
[[nodiscard]] inline double decay_bound(const CostReport& rep, int s) {
  return rep.c_bar * std::pow(rep.lambda, 2.0 * s);
}

}  // namespace declq
