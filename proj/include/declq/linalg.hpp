#pragma once

// Dense real-matrix kernel: spectra, Schur stability, discrete Lyapunov
// solves, single-output observer pole placement and transient growth bounds.
//
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "declq/errors.hpp"

namespace declq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

struct Spectrum {
  std::vector<Complex> eigenvalues;
  double spectral_radius = 0.0;
};

namespace detail {

inline std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_square(const Matrix& m, const char* who) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw DimensionError(std::string(who) + ": expected a non-empty square matrix, got " +
                         shape_of(m));
  }
}

inline void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) {
    throw InputError(std::string(who) + ": matrix has non-finite entries");
  }
}

}  // namespace detail

/// Induced 2-norm (largest singular value). Zero for empty matrices.
template <typename Derived>
[[nodiscard]] double norm2(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return 0.0;
  if (m.cols() == 1 || m.rows() == 1) return static_cast<double>(m.norm());
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m.eval());
  return static_cast<double>(svd.singularValues()(0));
}

/// Number of singular values above rel_tol * sigma_max.
template <typename Derived>
[[nodiscard]] Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m,
                                          double rel_tol = 1e-8) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m.eval());
  const auto& sv = svd.singularValues();
  const double largest = static_cast<double>(sv(0));
  if (largest == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (static_cast<double>(sv(i)) > rel_tol * largest) ++rank;
  }
  return rank;
}

[[nodiscard]] inline Spectrum spectrum(const Matrix& m) {
  detail::require_square(m, "spectrum");
  detail::require_finite(m, "spectrum");
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("spectrum: real Schur iteration did not converge", 0.0);
  }
  Spectrum out;
  out.eigenvalues.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Complex ev = solver.eigenvalues()(i);
    out.eigenvalues.push_back(ev);
    out.spectral_radius = std::max(out.spectral_radius, std::abs(ev));
  }
  return out;
}

[[nodiscard]] inline double spectral_radius(const Matrix& m) {
  return spectrum(m).spectral_radius;
}

/// True iff rho(m) < 1 - margin.
[[nodiscard]] inline bool is_schur_stable(const Matrix& m, double margin = 0.0) {
  return spectral_radius(m) < 1.0 - margin;
}

/// m^k by repeated squaring.
[[nodiscard]] inline Matrix matrix_power(const Matrix& m, unsigned k) {
  detail::require_square(m, "matrix_power");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

/// [H; HA; ...; HA^{n-1}]
[[nodiscard]] inline Matrix observability_matrix(const Matrix& a, const Matrix& h) {
  detail::require_square(a, "observability_matrix");
  if (h.cols() != a.rows()) {
    throw DimensionError("observability_matrix: H is " + detail::shape_of(h) + " but A is " +
                         detail::shape_of(a));
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index p = h.rows();
  Matrix obs(n * p, n);
  Matrix block = h;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.middleRows(i * p, p) = block;
    block = block * a;
  }
  return obs;
}

[[nodiscard]] inline bool is_observable(const Matrix& a, const Matrix& h, double rel_tol = 1e-8) {
  if (h.rows() == 0) return false;
  return numerical_rank(observability_matrix(a, h), rel_tol) == a.rows();
}

/// Symmetric PSD square root; eigenvalues in [-1e-10, 0] are clamped to zero.
[[nodiscard]] inline Matrix psd_sqrt(const Matrix& q) {
  detail::require_square(q, "psd_sqrt");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (q + q.transpose()));
  Vector ev = eig.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10) {
      throw InputError("psd_sqrt: matrix is not positive semidefinite");
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

namespace detail {

inline Matrix symmetrized_lyapunov_rhs(const Matrix& f, const Matrix& s) {
  require_square(f, "solve_dlyap");
  if (s.rows() != f.rows() || s.cols() != f.cols()) {
    throw DimensionError("solve_dlyap: S is " + shape_of(s) + " but F is " + shape_of(f));
  }
  require_finite(f, "solve_dlyap");
  require_finite(s, "solve_dlyap");
  if ((s - s.transpose()).norm() > 1e-9 * (1.0 + norm2(s))) {
    throw ShapeError("solve_dlyap: S is not symmetric");
  }
  const double rho = spectral_radius(f);
  if (rho >= 1.0) {
    throw InstabilityError("solve_dlyap: F is not Schur-stable (rho = " + std::to_string(rho) + ")",
                           rho);
  }
  return 0.5 * (s + s.transpose());
}

/// Column-major vec: (I - F' (x) F') vec(X) = vec(S).
inline Matrix dlyap_kronecker(const Matrix& f, const Matrix& s) {
  const Eigen::Index n = f.rows();
  const Eigen::Index nn = n * n;
  Matrix system = Matrix::Identity(nn, nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = i + j * n;
      for (Eigen::Index b = 0; b < n; ++b) {
        for (Eigen::Index a = 0; a < n; ++a) {
          system(row, a + b * n) -= f(a, i) * f(b, j);
        }
      }
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(s.data(), nn);
  const Vector sol = system.partialPivLu().solve(rhs);
  Matrix x = Eigen::Map<const Matrix>(sol.data(), n, n);
  return 0.5 * (x + x.transpose());
}

/// X = sum_k (F')^k S F^k accumulated by squaring: X <- X + G'XG, G <- G^2.
inline Matrix dlyap_doubling(const Matrix& f, const Matrix& s) {
  Matrix x = s;
  Matrix g = f;
  for (int iter = 0; iter < 128; ++iter) {
    const Matrix delta = g.transpose() * x * g;
    x += delta;
    x = 0.5 * (x + x.transpose());
    g = g * g;
    if (norm2(delta) < 1e-12 * (1.0 + norm2(x))) return x;
  }
  throw ConvergenceError("solve_dlyap: doubling iteration did not converge", norm2(g));
}

}  // namespace detail

/// Unique symmetric X with X = F' X F + S. Requires rho(F) < 1.
[[nodiscard]] inline Matrix solve_dlyap(const Matrix& f, const Matrix& s) {
  const Matrix sym = detail::symmetrized_lyapunov_rhs(f, s);
  if (f.rows() <= 50) return detail::dlyap_kronecker(f, sym);
  return detail::dlyap_doubling(f, sym);
}

/// Observer gain L (n x 1) with spec(A - L H) equal to `poles`, for a
/// single-output pair, by Ackermann's characteristic-polynomial matching.
[[nodiscard]] inline Matrix place_observer_poles(const Matrix& a, const Matrix& h,
                                                 const std::vector<Complex>& poles) {
  detail::require_square(a, "place_observer_poles");
  const Eigen::Index n = a.rows();
  if (h.rows() != 1 || h.cols() != n) {
    throw DimensionError("place_observer_poles: H must be 1x" + std::to_string(n) + ", got " +
                         detail::shape_of(h));
  }
  if (static_cast<Eigen::Index>(poles.size()) != n) {
    throw InputError("place_observer_poles: expected " + std::to_string(n) + " poles, got " +
                     std::to_string(poles.size()));
  }

  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (!std::isfinite(poles[i].real()) || !std::isfinite(poles[i].imag())) {
      throw InputError("place_observer_poles: non-finite pole");
    }
    if (used[i]) continue;
    const double tol = 1e-10 * (1.0 + std::abs(poles[i]));
    if (std::abs(poles[i].imag()) <= tol) {
      used[i] = true;
      continue;
    }
    bool matched = false;
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= tol) {
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw InputError("place_observer_poles: pole set is not closed under conjugation");
    }
  }

  const Matrix obs = observability_matrix(a, h);
  if (numerical_rank(obs) < n) {
    throw ObservabilityError("place_observer_poles: (A, H) is not observable");
  }

  // Monic characteristic polynomial, coeffs[k] multiplies lambda^k.
  std::vector<Complex> coeffs{Complex(1.0)};
  for (const Complex& p : poles) {
    std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      next[k + 1] += coeffs[k];
      next[k] -= p * coeffs[k];
    }
    coeffs = std::move(next);
  }

  // phi(A) via Horner.
  Matrix phi = Matrix::Identity(n, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    phi = phi * a + coeffs[static_cast<std::size_t>(k)].real() * Matrix::Identity(n, n);
  }

  Vector last = Vector::Zero(n);
  last(n - 1) = 1.0;
  const Vector v = obs.fullPivLu().solve(last);
  return phi * v;
}

/// c = sup_k ||F^k|| / lambda^k, for rho(F) < lambda < 1.
///
/// Iterates M = F / lambda. Stops once the ratio has decreased for 10
/// consecutive steps, k >= 50 and ||M^k|| <= 1; the last condition makes the
/// running maximum a bound for every later power as well. Capped at k = 5000.
[[nodiscard]] inline double transient_growth_constant(const Matrix& f, double lambda) {
  detail::require_square(f, "transient_growth_constant");
  const double rho = spectral_radius(f);
  if (!(lambda > rho) || !(lambda < 1.0)) {
    throw InputError("transient_growth_constant: lambda must lie in (rho(F), 1) = (" +
                     std::to_string(rho) + ", 1), got " + std::to_string(lambda));
  }
  const Matrix scaled = f / lambda;
  Matrix power = Matrix::Identity(f.rows(), f.cols());
  double best = 1.0;
  double previous = 1.0;
  int decreasing = 0;
  for (int k = 1; k <= 5000; ++k) {
    power = power * scaled;
    const double ratio = norm2(power);
    best = std::max(best, ratio);
    decreasing = ratio < previous ? decreasing + 1 : 0;
    previous = ratio;
    if (k >= 50 && decreasing >= 10 && ratio <= 1.0) break;
  }
  return best;
}

}  // namespace declq
