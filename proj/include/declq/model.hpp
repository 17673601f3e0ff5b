#pragma once

// Plant description, standing-assumption checks and information patterns.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "declq/linalg.hpp"

namespace declq {

/// Which signals each agent's controller may use at time k.
enum class InformationPattern {
  StateFeedback,  ///< every agent sees x(k)
  InputSharing,   ///< own measurements plus every agent's past inputs
  Private,        ///< own measurements and own past inputs only
};

[[nodiscard]] constexpr std::string_view to_string(InformationPattern p) noexcept {
  switch (p) {
    case InformationPattern::StateFeedback: return "state_feedback";
    case InformationPattern::InputSharing: return "input_sharing";
    case InformationPattern::Private: return "private";
  }
  return "unknown";
}

[[nodiscard]] inline std::optional<InformationPattern> parse_pattern(std::string_view s) {
  if (s == "state_feedback") return InformationPattern::StateFeedback;
  if (s == "input_sharing") return InformationPattern::InputSharing;
  if (s == "private") return InformationPattern::Private;
  return std::nullopt;
}

[[nodiscard]] constexpr bool is_decentralized(InformationPattern p) noexcept {
  return p != InformationPattern::StateFeedback;
}

/// x(k+1) = A x(k) + sum_i B_i u_i(k),  y_i(k) = H_i x(k),
/// J = sum_k x'Qx + sum_i u_i' R_i u_i,  x(0) = x0.
struct PlantModel {
  Matrix A;
  std::vector<Matrix> B;
  std::vector<Matrix> H;
  Matrix Q;
  std::vector<Matrix> R;
  Vector x0;

  [[nodiscard]] Eigen::Index states() const noexcept { return A.rows(); }
  [[nodiscard]] std::size_t agents() const noexcept { return B.size(); }
  [[nodiscard]] Eigen::Index input_dim(std::size_t i) const { return B.at(i).cols(); }
  [[nodiscard]] Eigen::Index output_dim(std::size_t i) const { return H.at(i).rows(); }
  [[nodiscard]] Eigen::Index total_inputs() const noexcept {
    Eigen::Index m = 0;
    for (const auto& b : B) m += b.cols();
    return m;
  }
};

enum class Severity { Error, Warning };

enum class Check {
  Dimensions,
  StateWeight,        ///< Q symmetric PSD
  InputWeight,        ///< R_i symmetric PD
  Stabilizability,    ///< (A, [B_1 ... B_r])
  StateObservability, ///< (A, Q^{1/2})
  AgentObservability, ///< (A, H_i)
};

struct Diagnostic {
  Severity severity = Severity::Error;
  Check check = Check::Dimensions;
  int agent = -1;  ///< -1 when not agent-specific
  std::string message;
};

[[nodiscard]] inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

/// B = [B_1 ... B_r] and R = blkdiag(R_1, ..., R_r).
struct StackedForm {
  Matrix B;
  Matrix R;
  std::vector<Eigen::Index> offsets;  ///< first column of each agent's block
  std::vector<Eigen::Index> widths;   ///< m_i
};

namespace detail {

inline std::vector<Diagnostic> dimension_diagnostics(const PlantModel& plant) {
  std::vector<Diagnostic> out;
  auto fail = [&out](std::string msg, int agent = -1) {
    out.push_back({Severity::Error, Check::Dimensions, agent, std::move(msg)});
  };
  const Eigen::Index n = plant.A.rows();
  if (n < 1 || plant.A.cols() != n) {
    fail("A must be a non-empty square matrix, got " + shape_of(plant.A));
    return out;
  }
  if (!plant.A.allFinite()) fail("A has non-finite entries");
  const std::size_t r = plant.B.size();
  if (r < 1) fail("at least one agent is required");
  if (plant.H.size() != r) {
    fail("expected " + std::to_string(r) + " measurement matrices, got " +
         std::to_string(plant.H.size()));
  }
  if (plant.R.size() != r) {
    fail("expected " + std::to_string(r) + " input weights, got " + std::to_string(plant.R.size()));
  }
  if (plant.Q.rows() != n || plant.Q.cols() != n) {
    fail("Q must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
         shape_of(plant.Q));
  }
  if (plant.x0.size() != n) {
    fail("x0 must have " + std::to_string(n) + " entries, got " + std::to_string(plant.x0.size()));
  }
  for (std::size_t i = 0; i < r; ++i) {
    const int ai = static_cast<int>(i);
    const std::string tag = "agent " + std::to_string(i + 1) + ": ";
    const Matrix& b = plant.B[i];
    if (b.rows() != n || b.cols() < 1) fail(tag + "B must be " + std::to_string(n) + "xm, got " + shape_of(b), ai);
    if (i < plant.H.size()) {
      const Matrix& h = plant.H[i];
      if (h.cols() != n || h.rows() < 1) fail(tag + "H must be sx" + std::to_string(n) + ", got " + shape_of(h), ai);
    }
    if (i < plant.R.size()) {
      const Matrix& rw = plant.R[i];
      if (rw.rows() != b.cols() || rw.cols() != b.cols()) {
        fail(tag + "R must be " + std::to_string(b.cols()) + "x" + std::to_string(b.cols()) +
                 ", got " + shape_of(rw),
             ai);
      }
    }
  }
  return out;
}

inline bool pbh_full_rank(const Complex& lambda, const Matrix& a, const Matrix& other,
                          bool stack_horizontally) {
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = a.rows();
  const CMatrix shifted = lambda * CMatrix::Identity(n, n) - a.cast<Complex>();
  CMatrix test;
  if (stack_horizontally) {
    test.resize(n, n + other.cols());
    test << shifted, other.cast<Complex>();
  } else {
    test.resize(n + other.rows(), n);
    test << shifted, other.cast<Complex>();
  }
  return numerical_rank(test, 1e-8) == n;
}

}  // namespace detail

/// Checks dimensions, weight definiteness, stabilizability of (A, B),
/// observability of (A, Q^{1/2}) and of each (A, H_i). Empty result means
/// every check passed.
[[nodiscard]] inline std::vector<Diagnostic> validate(const PlantModel& plant) {
  std::vector<Diagnostic> out = detail::dimension_diagnostics(plant);
  if (has_errors(out)) return out;

  const Eigen::Index n = plant.states();
  bool q_ok = true;
  if (!plant.Q.allFinite() || (plant.Q - plant.Q.transpose()).norm() > 1e-9 * (1.0 + norm2(plant.Q))) {
    out.push_back({Severity::Error, Check::StateWeight, -1, "Q is not symmetric"});
    q_ok = false;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (plant.Q + plant.Q.transpose()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      out.push_back({Severity::Error, Check::StateWeight, -1, "Q is not positive semidefinite"});
      q_ok = false;
    }
  }

  for (std::size_t i = 0; i < plant.agents(); ++i) {
    const Matrix& rw = plant.R[i];
    const std::string tag = "agent " + std::to_string(i + 1) + ": ";
    if (!rw.allFinite() || (rw - rw.transpose()).norm() > 1e-9 * (1.0 + norm2(rw))) {
      out.push_back({Severity::Error, Check::InputWeight, static_cast<int>(i), tag + "R is not symmetric"});
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (rw + rw.transpose()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 1e-10) {
      out.push_back({Severity::Error, Check::InputWeight, static_cast<int>(i),
                     tag + "R is not positive definite"});
    }
  }

  Matrix b_stack(n, plant.total_inputs());
  {
    Eigen::Index col = 0;
    for (const auto& b : plant.B) {
      b_stack.middleCols(col, b.cols()) = b;
      col += b.cols();
    }
  }
  const Spectrum spec = spectrum(plant.A);
  for (const Complex& lambda : spec.eigenvalues) {
    if (std::abs(lambda) >= 1.0 - 1e-10 && !detail::pbh_full_rank(lambda, plant.A, b_stack, true)) {
      out.push_back({Severity::Error, Check::Stabilizability, -1,
                     "(A, B) is not stabilizable: uncontrollable mode at lambda = " +
                         std::to_string(lambda.real()) + (lambda.imag() >= 0 ? "+" : "") +
                         std::to_string(lambda.imag()) + "i"});
      break;
    }
  }

  if (q_ok) {
    const Matrix q_root = psd_sqrt(plant.Q);
    for (const Complex& lambda : spec.eigenvalues) {
      if (!detail::pbh_full_rank(lambda, plant.A, q_root, false)) {
        out.push_back({Severity::Error, Check::StateObservability, -1,
                       "(A, Q^1/2) is not observable: unobservable mode at lambda = " +
                           std::to_string(lambda.real()) + (lambda.imag() >= 0 ? "+" : "") +
                           std::to_string(lambda.imag()) + "i"});
        break;
      }
    }
  }

  for (std::size_t i = 0; i < plant.agents(); ++i) {
    if (!is_observable(plant.A, plant.H[i])) {
      out.push_back({Severity::Error, Check::AgentObservability, static_cast<int>(i),
                     "agent " + std::to_string(i + 1) + ": (A, H) is not observable"});
    }
  }
  return out;
}

/// Throws DimensionError if the plant's shapes are inconsistent.
inline void require_consistent(const PlantModel& plant) {
  const auto diags = detail::dimension_diagnostics(plant);
  if (!diags.empty()) throw DimensionError(diags.front().message);
}

[[nodiscard]] inline StackedForm stack(const PlantModel& plant) {
  require_consistent(plant);
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.total_inputs();
  StackedForm out;
  out.B = Matrix::Zero(n, m);
  out.R = Matrix::Zero(m, m);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < plant.agents(); ++i) {
    const Eigen::Index w = plant.input_dim(i);
    out.B.middleCols(offset, w) = plant.B[i];
    out.R.block(offset, offset, w, w) = plant.R[i];
    out.offsets.push_back(offset);
    out.widths.push_back(w);
    offset += w;
  }
  return out;
}

/// Recovers the per-agent B_i from a stacked form.
[[nodiscard]] inline std::vector<Matrix> unstack(const StackedForm& form) {
  std::vector<Matrix> parts;
  parts.reserve(form.offsets.size());
  for (std::size_t i = 0; i < form.offsets.size(); ++i) {
    parts.emplace_back(form.B.middleCols(form.offsets[i], form.widths[i]));
  }
  return parts;
}

}  // namespace declq
