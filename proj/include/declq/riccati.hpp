#pragma once

// Discrete algebraic Riccati equation and the centralized LQ gain.

#include <string>
#include <vector>

#include "declq/linalg.hpp"
#include "declq/model.hpp"

namespace declq {

struct RiccatiSolution {
  Matrix P;                   ///< stabilizing solution, symmetric PSD
  Matrix K;                   ///< u = K x, K = -(R + B'PB)^{-1} B'PA
  std::vector<Matrix> K_parts;  ///< row blocks of K, one per agent
  long iterations = 0;
  double residual = 0.0;      ///< ||P - rhs(P)||
};

/// -(R + B'PB)^{-1} B'PA, via a Cholesky solve.
[[nodiscard]] inline Matrix lq_gain(const Matrix& a, const Matrix& b, const Matrix& r,
                                    const Matrix& p) {
  const Matrix gram = r + b.transpose() * p * b;
  return -Eigen::LLT<Matrix>(0.5 * (gram + gram.transpose())).solve(b.transpose() * p * a);
}

/// One value-iteration step: A'PA + Q - A'PB (R + B'PB)^{-1} B'PA, symmetrized.
[[nodiscard]] inline Matrix riccati_step(const Matrix& a, const Matrix& b, const Matrix& q,
                                         const Matrix& r, const Matrix& p) {
  const Matrix gram = r + b.transpose() * p * b;
  const Matrix bpa = b.transpose() * p * a;
  const Matrix next = a.transpose() * p * a + q -
                      bpa.transpose() * Eigen::LLT<Matrix>(0.5 * (gram + gram.transpose())).solve(bpa);
  return 0.5 * (next + next.transpose());
}

/// Splits K into one row block per agent.
[[nodiscard]] inline std::vector<Matrix> partition_gain(const PlantModel& plant, const Matrix& k) {
  std::vector<Matrix> parts;
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    const Eigen::Index m = plant.input_dim(i);
    parts.emplace_back(k.middleRows(row, m));
    row += m;
  }
  return parts;
}

/// Value iteration from P = 0 until ||P_{k+1} - P_k|| <= tol (1 + ||P_k||).
///
/// Throws PreconditionError when R_i is not positive definite, (A, B) is not
/// stabilizable or (A, Q^{1/2}) is not observable, and ConvergenceError when
/// max_iter is exhausted.
[[nodiscard]] inline RiccatiSolution solve_dare(const PlantModel& plant, double tol = 1e-12,
                                                long max_iter = 100000) {
  if (!(tol > 0.0)) throw InputError("solve_dare: tol must be positive");
  for (const Diagnostic& d : validate(plant)) {
    if (d.severity != Severity::Error || d.check == Check::AgentObservability) continue;
    if (d.check == Check::Dimensions) throw DimensionError("solve_dare: " + d.message);
    throw PreconditionError("solve_dare: " + d.message);
  }

  const StackedForm form = stack(plant);
  const Matrix& a = plant.A;
  const Matrix& b = form.B;
  const Matrix& q = plant.Q;
  const Matrix& r = form.R;

  Matrix p = Matrix::Zero(a.rows(), a.cols());
  double step = 0.0;
  long iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    Matrix next = riccati_step(a, b, q, r, p);
    step = norm2(next - p);
    const double scale = 1.0 + norm2(p);
    p = std::move(next);
    ++iter;
    if (step <= tol * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("solve_dare: no convergence after " + std::to_string(max_iter) +
                               " iterations (last step " + std::to_string(step) + ")",
                           step);
  }

  RiccatiSolution sol;
  sol.P = p;
  sol.K = lq_gain(a, b, r, p);
  sol.K_parts = partition_gain(plant, sol.K);
  sol.iterations = iter;
  sol.residual = norm2(p - riccati_step(a, b, q, r, p));

  const double rho = spectral_radius(a + b * sol.K);
  if (rho >= 1.0) {
    throw ConvergenceError("solve_dare: converged P does not stabilize A + BK (rho = " +
                               std::to_string(rho) + ")",
                           sol.residual);
  }
  return sol;
}

/// x' P x
[[nodiscard]] inline double optimal_cost(const RiccatiSolution& sol, const Vector& x) {
  if (x.size() != sol.P.rows()) {
    throw DimensionError("optimal_cost: x has " + std::to_string(x.size()) +
                         " entries, P is " + detail::shape_of(sol.P));
  }
  return x.dot(sol.P * x);
}

/// A + [B_1 ... B_r] K
[[nodiscard]] inline Matrix closed_loop_matrix(const PlantModel& plant, const RiccatiSolution& sol) {
  return plant.A + stack(plant).B * sol.K;
}

}  // namespace declq
