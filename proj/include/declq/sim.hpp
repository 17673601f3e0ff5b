#pragma once

// Closed-loop trajectories under each information pattern.

#include <string>
#include <vector>

#include "declq/linalg.hpp"
#include "declq/model.hpp"
#include "declq/observers.hpp"
#include "declq/riccati.hpp"

namespace declq {

/// x, xhat and xtilde_norms hold horizon + 1 samples; u, y and stage_cost
/// hold horizon samples (k = 0 .. horizon - 1).
struct SimTrace {
  InformationPattern pattern = InformationPattern::StateFeedback;
  int horizon = 0;
  std::vector<Vector> x;
  std::vector<std::vector<Vector>> xhat;
  std::vector<std::vector<double>> xtilde_norms;
  std::vector<std::vector<Vector>> u;
  std::vector<std::vector<Vector>> y;
  std::vector<double> stage_cost;
};

/// x'Qx + sum_i u_i' R_i u_i
[[nodiscard]] inline double stage_cost(const PlantModel& plant, const Vector& x,
                                       const std::vector<Vector>& u) {
  double cost = x.dot(plant.Q * x);
  for (std::size_t i = 0; i < u.size(); ++i) cost += u[i].dot(plant.R[i] * u[i]);
  return cost;
}

/// A x + sum_i B_i u_i
[[nodiscard]] inline Vector plant_step(const PlantModel& plant, const Vector& x,
                                       const std::vector<Vector>& u) {
  Vector next = plant.A * x;
  for (std::size_t i = 0; i < u.size(); ++i) next += plant.B[i] * u[i];
  return next;
}

/// Within a step: measure y(k), compute u(k) from the current estimates,
/// record the stage cost, advance the plant, then advance the observers.
///
/// `scheme` may be null only for StateFeedback, where every agent's estimate
/// is the true state. An empty `xhat0` means all-zero initial estimates.
[[nodiscard]] inline SimTrace simulate(const PlantModel& plant, const RiccatiSolution& sol,
                                       const ObserverScheme* scheme, InformationPattern pattern,
                                       const Vector& x0, std::vector<Vector> xhat0, int horizon) {
  require_consistent(plant);
  detail::require_solution(plant, sol, "simulate");
  if (horizon < 1) throw InputError("simulate: horizon must be at least 1");
  const std::size_t r = plant.agents();
  const Eigen::Index n = plant.states();
  if (x0.size() != n) throw DimensionError("simulate: x0 has the wrong size");
  if (is_decentralized(pattern)) {
    if (scheme == nullptr) throw InputError("simulate: decentralized pattern requires an observer scheme");
    if (scheme->pattern != pattern) throw InputError("simulate: scheme pattern does not match");
    if (xhat0.empty()) xhat0.assign(r, Vector::Zero(n));
    detail::require_vectors(xhat0, r, std::vector<Eigen::Index>(r, n), "simulate", "estimate");
  }

  SimTrace trace;
  trace.pattern = pattern;
  trace.horizon = horizon;
  const auto hz = static_cast<std::size_t>(horizon);
  trace.x.reserve(hz + 1);
  trace.xhat.reserve(hz + 1);
  trace.xtilde_norms.reserve(hz + 1);
  trace.u.reserve(hz);
  trace.y.reserve(hz);
  trace.stage_cost.reserve(hz);

  Vector x = x0;
  ObserverState est;
  est.xhat = pattern == InformationPattern::StateFeedback ? std::vector<Vector>(r, x0) : xhat0;

  auto record_state = [&] {
    trace.x.push_back(x);
    trace.xhat.push_back(est.xhat);
    std::vector<double> norms(r);
    for (std::size_t i = 0; i < r; ++i) norms[i] = (x - est.xhat[i]).norm();
    trace.xtilde_norms.push_back(std::move(norms));
  };

  record_state();
  for (int k = 0; k < horizon; ++k) {
    std::vector<Vector> y(r);
    for (std::size_t i = 0; i < r; ++i) y[i] = plant.H[i] * x;
    const std::vector<Vector> u = control_from_estimates(sol, est);
    trace.stage_cost.push_back(stage_cost(plant, x, u));

    x = plant_step(plant, x, u);
    switch (pattern) {
      case InformationPattern::StateFeedback:
        est.xhat.assign(r, x);
        break;
      case InformationPattern::InputSharing:
        est = observer_step_input_sharing(plant, *scheme, est, y, u);
        break;
      case InformationPattern::Private:
        est = observer_step_private(plant, sol, *scheme, est, y, u);
        break;
    }
    trace.u.push_back(u);
    trace.y.push_back(std::move(y));
    record_state();
  }
  return trace;
}

[[nodiscard]] inline SimTrace simulate_state_feedback(const PlantModel& plant,
                                                      const RiccatiSolution& sol,
                                                      const Vector& x0, int horizon) {
  return simulate(plant, sol, nullptr, InformationPattern::StateFeedback, x0, {}, horizon);
}

[[nodiscard]] inline SimTrace simulate(const PlantModel& plant, const RiccatiSolution& sol,
                                       const ObserverScheme& scheme, const Vector& x0,
                                       std::vector<Vector> xhat0, int horizon) {
  return simulate(plant, sol, &scheme, scheme.pattern, x0, std::move(xhat0), horizon);
}

/// Stacked [x; x - x^_1; ...; x - x^_r] at sample k of a trace.
[[nodiscard]] inline Vector augmented_state(const SimTrace& trace, std::size_t k) {
  const Vector& x = trace.x.at(k);
  const auto& xh = trace.xhat.at(k);
  const Eigen::Index n = x.size();
  Vector z(n * static_cast<Eigen::Index>(xh.size() + 1));
  z.head(n) = x;
  for (std::size_t i = 0; i < xh.size(); ++i) {
    z.segment(n * static_cast<Eigen::Index>(i + 1), n) = x - xh[i];
  }
  return z;
}

}  // namespace declq
