#pragma once

// Observer schemes for the two decentralized information patterns.
//
// With x~_i = x - x^_i stacked into x~ = [x~_1; ...; x~_r], both patterns give
// x~(k+1) = E x~(k) for a structured error matrix E, and
//
//   [x; x~](k+1) = [[A + BK, C], [0, E]] [x; x~](k),   C = [-B_1K_1 ... -B_rK_r].
//
// Input sharing: E = blkdiag(A - L_i H_i).
// Private:       E_ii = A + sum_{j != i} B_j K_j - L_i H_i,  E_ij = -B_j K_j.

#include <string>
#include <vector>

#include "declq/linalg.hpp"
#include "declq/model.hpp"
#include "declq/riccati.hpp"

namespace declq {

struct ObserverScheme {
  InformationPattern pattern = InformationPattern::Private;
  std::vector<Matrix> L;    ///< L_i is n x s_i
  Matrix error_matrix;      ///< (r n) x (r n)
  Matrix coupling_B;        ///< n x (r n)
  Matrix augmented_matrix;  ///< ((r+1) n) x ((r+1) n)
};

struct ObserverState {
  std::vector<Vector> xhat;
};

namespace detail {

inline void require_gains(const PlantModel& plant, const std::vector<Matrix>& gains,
                          const char* who) {
  require_consistent(plant);
  if (gains.size() != plant.agents()) {
    throw DimensionError(std::string(who) + ": expected " + std::to_string(plant.agents()) +
                         " observer gains, got " + std::to_string(gains.size()));
  }
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (gains[i].rows() != plant.states() || gains[i].cols() != plant.output_dim(i)) {
      throw DimensionError(std::string(who) + ": L_" + std::to_string(i + 1) + " must be " +
                           std::to_string(plant.states()) + "x" +
                           std::to_string(plant.output_dim(i)) + ", got " + shape_of(gains[i]));
    }
  }
}

inline void require_solution(const PlantModel& plant, const RiccatiSolution& sol, const char* who) {
  if (sol.K_parts.size() != plant.agents() || sol.P.rows() != plant.states()) {
    throw DimensionError(std::string(who) + ": Riccati solution does not match the plant");
  }
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    if (sol.K_parts[i].rows() != plant.input_dim(i) || sol.K_parts[i].cols() != plant.states()) {
      throw DimensionError(std::string(who) + ": K_" + std::to_string(i + 1) + " has the wrong shape");
    }
  }
}

inline void require_vectors(const std::vector<Vector>& vs, std::size_t count,
                            const std::vector<Eigen::Index>& sizes, const char* who,
                            const char* what) {
  if (vs.size() != count) {
    throw DimensionError(std::string(who) + ": expected " + std::to_string(count) + " " + what +
                         " vectors, got " + std::to_string(vs.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (vs[i].size() != sizes[i]) {
      throw DimensionError(std::string(who) + ": " + what + " " + std::to_string(i + 1) +
                           " has " + std::to_string(vs[i].size()) + " entries, expected " +
                           std::to_string(sizes[i]));
    }
  }
}

/// sum_{j != i} B_j K_j
inline Matrix others_feedback(const PlantModel& plant, const RiccatiSolution& sol, std::size_t i) {
  Matrix sum = Matrix::Zero(plant.states(), plant.states());
  for (std::size_t j = 0; j < plant.agents(); ++j) {
    if (j != i) sum += plant.B[j] * sol.K_parts[j];
  }
  return sum;
}

}  // namespace detail

/// [-B_1 K_1 ... -B_r K_r]
[[nodiscard]] inline Matrix coupling_matrix(const PlantModel& plant, const RiccatiSolution& sol) {
  detail::require_solution(plant, sol, "coupling_matrix");
  const Eigen::Index n = plant.states();
  Matrix out(n, n * static_cast<Eigen::Index>(plant.agents()));
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * n, n) = -plant.B[i] * sol.K_parts[i];
  }
  return out;
}

/// Two-agent private-pattern error matrix in its original form
/// [[A + B2K2 - L1H1, -B2K2], [-B1K1, A + B1K1 - L2H2]].
[[nodiscard]] inline Matrix two_agent_private_error_matrix(const PlantModel& plant,
                                                           const RiccatiSolution& sol,
                                                           const std::vector<Matrix>& gains) {
  if (plant.agents() != 2) throw InputError("two_agent_private_error_matrix: plant must have 2 agents");
  detail::require_gains(plant, gains, "two_agent_private_error_matrix");
  detail::require_solution(plant, sol, "two_agent_private_error_matrix");
  const Eigen::Index n = plant.states();
  const Matrix b1k1 = plant.B[0] * sol.K_parts[0];
  const Matrix b2k2 = plant.B[1] * sol.K_parts[1];
  Matrix out(2 * n, 2 * n);
  out << plant.A + b2k2 - gains[0] * plant.H[0], -b2k2,
         -b1k1, plant.A + b1k1 - gains[1] * plant.H[1];
  return out;
}

/// Stacked estimation-error dynamics for a decentralized pattern.
[[nodiscard]] inline Matrix error_matrix(const PlantModel& plant, const RiccatiSolution& sol,
                                         const std::vector<Matrix>& gains,
                                         InformationPattern pattern) {
  if (pattern == InformationPattern::StateFeedback) {
    throw InputError("error_matrix: state feedback needs no observer");
  }
  detail::require_gains(plant, gains, "error_matrix");
  detail::require_solution(plant, sol, "error_matrix");
  const Eigen::Index n = plant.states();
  const std::size_t r = plant.agents();
  const Eigen::Index rn = n * static_cast<Eigen::Index>(r);
  Matrix out = Matrix::Zero(rn, rn);
  for (std::size_t i = 0; i < r; ++i) {
    const Eigen::Index oi = static_cast<Eigen::Index>(i) * n;
    const Matrix injection = gains[i] * plant.H[i];
    if (pattern == InformationPattern::InputSharing) {
      out.block(oi, oi, n, n) = plant.A - injection;
      continue;
    }
    for (std::size_t j = 0; j < r; ++j) {
      const Eigen::Index oj = static_cast<Eigen::Index>(j) * n;
      if (i == j) {
        out.block(oi, oi, n, n) = plant.A + detail::others_feedback(plant, sol, i) - injection;
      } else {
        out.block(oi, oj, n, n) = -plant.B[j] * sol.K_parts[j];
      }
    }
  }
  return out;
}

[[nodiscard]] inline ObserverScheme build_scheme(const PlantModel& plant, const RiccatiSolution& sol,
                                                 std::vector<Matrix> gains,
                                                 InformationPattern pattern) {
  ObserverScheme scheme;
  scheme.pattern = pattern;
  scheme.error_matrix = error_matrix(plant, sol, gains, pattern);
  scheme.coupling_B = coupling_matrix(plant, sol);
  scheme.L = std::move(gains);

  const Eigen::Index n = plant.states();
  const Eigen::Index rn = scheme.error_matrix.rows();
  scheme.augmented_matrix = Matrix::Zero(n + rn, n + rn);
  scheme.augmented_matrix.topLeftCorner(n, n) = closed_loop_matrix(plant, sol);
  scheme.augmented_matrix.topRightCorner(n, rn) = scheme.coupling_B;
  scheme.augmented_matrix.bottomRightCorner(rn, rn) = scheme.error_matrix;
  return scheme;
}

/// u_i = K_i x^_i
[[nodiscard]] inline std::vector<Vector> control_from_estimates(const RiccatiSolution& sol,
                                                                const ObserverState& state) {
  if (state.xhat.size() != sol.K_parts.size()) {
    throw DimensionError("control_from_estimates: expected " + std::to_string(sol.K_parts.size()) +
                         " estimates, got " + std::to_string(state.xhat.size()));
  }
  std::vector<Vector> u;
  u.reserve(state.xhat.size());
  for (std::size_t i = 0; i < state.xhat.size(); ++i) {
    if (state.xhat[i].size() != sol.K_parts[i].cols()) {
      throw DimensionError("control_from_estimates: estimate " + std::to_string(i + 1) +
                           " has the wrong size");
    }
    u.emplace_back(sol.K_parts[i] * state.xhat[i]);
  }
  return u;
}

/// x^_i(k+1) = A x^_i + sum_j B_j u_j + L_i (y_i - H_i x^_i), all agents'
/// applied inputs shared.
[[nodiscard]] inline ObserverState observer_step_input_sharing(const PlantModel& plant,
                                                               const ObserverScheme& scheme,
                                                               const ObserverState& state,
                                                               const std::vector<Vector>& y,
                                                               const std::vector<Vector>& u) {
  constexpr const char* who = "observer_step_input_sharing";
  if (scheme.pattern != InformationPattern::InputSharing) {
    throw InputError(std::string(who) + ": scheme is not an input-sharing scheme");
  }
  const std::size_t r = plant.agents();
  std::vector<Eigen::Index> n_sizes(r, plant.states()), s_sizes, m_sizes;
  for (std::size_t i = 0; i < r; ++i) {
    s_sizes.push_back(plant.output_dim(i));
    m_sizes.push_back(plant.input_dim(i));
  }
  detail::require_vectors(state.xhat, r, n_sizes, who, "estimate");
  detail::require_vectors(y, r, s_sizes, who, "measurement");
  detail::require_vectors(u, r, m_sizes, who, "input");

  Vector drive = Vector::Zero(plant.states());
  for (std::size_t j = 0; j < r; ++j) drive += plant.B[j] * u[j];

  ObserverState next;
  next.xhat.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    const Vector& xh = state.xhat[i];
    next.xhat.emplace_back(plant.A * xh + drive + scheme.L[i] * (y[i] - plant.H[i] * xh));
  }
  return next;
}

/// Agent i's private observer update. Only agent i's own measurement and own
/// input enter; the other agents' inputs are reconstructed as B_j K_j x^_i.
[[nodiscard]] inline Vector private_observer_update(const PlantModel& plant,
                                                    const RiccatiSolution& sol,
                                                    const Matrix& gain, std::size_t agent,
                                                    const Vector& xhat, const Vector& y_own,
                                                    const Vector& u_own) {
  return plant.A * xhat + plant.B[agent] * u_own +
         detail::others_feedback(plant, sol, agent) * xhat + gain * (y_own - plant.H[agent] * xhat);
}

[[nodiscard]] inline ObserverState observer_step_private(const PlantModel& plant,
                                                         const RiccatiSolution& sol,
                                                         const ObserverScheme& scheme,
                                                         const ObserverState& state,
                                                         const std::vector<Vector>& y,
                                                         const std::vector<Vector>& own_u) {
  constexpr const char* who = "observer_step_private";
  if (scheme.pattern != InformationPattern::Private) {
    throw InputError(std::string(who) + ": scheme is not a private-information scheme");
  }
  detail::require_solution(plant, sol, who);
  const std::size_t r = plant.agents();
  std::vector<Eigen::Index> n_sizes(r, plant.states()), s_sizes, m_sizes;
  for (std::size_t i = 0; i < r; ++i) {
    s_sizes.push_back(plant.output_dim(i));
    m_sizes.push_back(plant.input_dim(i));
  }
  detail::require_vectors(state.xhat, r, n_sizes, who, "estimate");
  detail::require_vectors(y, r, s_sizes, who, "measurement");
  detail::require_vectors(own_u, r, m_sizes, who, "input");

  ObserverState next;
  next.xhat.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    next.xhat.emplace_back(
        private_observer_update(plant, sol, scheme.L[i], i, state.xhat[i], y[i], own_u[i]));
  }
  return next;
}

}  // namespace declq
