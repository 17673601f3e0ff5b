#pragma once

// Observer-gain selection and certification.
//
// Stage 1 places the eigenvalues of each A - L_i H_i at well-damped real
// targets. If the assembled error matrix is not yet certified, stage 2 runs a
// seeded random local search over all gains that accepts strict decreases of
// its spectral radius. Failure to certify is a result, not an error.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "declq/linalg.hpp"
#include "declq/model.hpp"
#include "declq/observers.hpp"
#include "declq/riccati.hpp"

namespace declq {

enum class SynthesisMethod { Given, PolePlacement, RandomSearch };

[[nodiscard]] constexpr std::string_view to_string(SynthesisMethod m) noexcept {
  switch (m) {
    case SynthesisMethod::Given: return "given";
    case SynthesisMethod::PolePlacement: return "pole_placement";
    case SynthesisMethod::RandomSearch: return "random_search";
  }
  return "unknown";
}

struct SynthesisResult {
  std::vector<Matrix> L;
  double achieved_radius = 0.0;
  SynthesisMethod method = SynthesisMethod::Given;
  bool certified = false;  ///< achieved_radius < 1 - margin
  int evaluations = 0;
};

struct SearchOptions {
  int budget = 5000;        ///< spectral-radius evaluations, stage 1 included
  double initial_step = 0.5;
  int patience = 50;        ///< non-improvements before the step is halved
};

/// n distinct reals evenly spaced in [0.1, 0.5].
[[nodiscard]] inline std::vector<Complex> default_pole_targets(Eigen::Index n) {
  std::vector<Complex> poles;
  if (n == 1) return {Complex(0.1)};
  for (Eigen::Index k = 0; k < n; ++k) {
    poles.emplace_back(0.1 + 0.4 * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return poles;
}

/// Certifies user-supplied gains.
[[nodiscard]] inline SynthesisResult certify_given(const PlantModel& plant, const RiccatiSolution& sol,
                                                   std::vector<Matrix> gains,
                                                   InformationPattern pattern, double margin = 0.02) {
  SynthesisResult out;
  out.achieved_radius = spectral_radius(error_matrix(plant, sol, gains, pattern));
  out.L = std::move(gains);
  out.method = SynthesisMethod::Given;
  out.certified = out.achieved_radius < 1.0 - margin;
  out.evaluations = 1;
  return out;
}

namespace detail {

/// Pole placement through the first output row that is observable on its own.
inline Matrix placed_gain(const Matrix& a, const Matrix& h, const std::vector<Complex>& targets) {
  Matrix gain = Matrix::Zero(a.rows(), h.rows());
  for (Eigen::Index row = 0; row < h.rows(); ++row) {
    const Matrix hr = h.row(row);
    if (is_observable(a, hr)) {
      gain.col(row) = place_observer_poles(a, hr, targets);
      break;
    }
  }
  return gain;
}

}  // namespace detail

[[nodiscard]] inline SynthesisResult synthesize(const PlantModel& plant, const RiccatiSolution& sol,
                                                InformationPattern pattern, std::uint64_t seed,
                                                double margin = 0.02,
                                                const SearchOptions& options = {}) {
  if (pattern == InformationPattern::StateFeedback) {
    throw InputError("synthesize: state feedback needs no observer gains");
  }
  require_consistent(plant);
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    if (!is_observable(plant.A, plant.H[i])) {
      throw PreconditionError("synthesize: (A, H_" + std::to_string(i + 1) + ") is not observable");
    }
  }

  const auto targets = default_pole_targets(plant.states());
  SynthesisResult best;
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    best.L.push_back(detail::placed_gain(plant.A, plant.H[i], targets));
  }
  best.achieved_radius = spectral_radius(error_matrix(plant, sol, best.L, pattern));
  best.evaluations = 1;
  best.method = SynthesisMethod::PolePlacement;
  best.certified = best.achieved_radius < 1.0 - margin;
  if (best.certified) return best;

  best.method = SynthesisMethod::RandomSearch;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double step = options.initial_step;
  int stale = 0;
  while (best.evaluations < options.budget && !best.certified) {
    std::vector<Matrix> candidate = best.L;
    for (Matrix& gain : candidate) {
      for (Eigen::Index c = 0; c < gain.cols(); ++c) {
        for (Eigen::Index r = 0; r < gain.rows(); ++r) gain(r, c) += step * normal(rng);
      }
    }
    const double radius = spectral_radius(error_matrix(plant, sol, candidate, pattern));
    ++best.evaluations;
    if (radius < best.achieved_radius) {
      best.L = std::move(candidate);
      best.achieved_radius = radius;
      best.certified = radius < 1.0 - margin;
      stale = 0;
    } else if (++stale >= options.patience) {
      step *= 0.5;
      stale = 0;
    }
  }
  return best;
}

}  // namespace declq
