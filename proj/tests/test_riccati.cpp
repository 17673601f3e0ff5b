#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "declq/riccati.hpp"
#include "test_support.hpp"

namespace declq {
namespace {

PlantModel scalar_plant(double a) {
  PlantModel p;
  p.A = Matrix{{a}};
  p.B = {Matrix{{1.0}}};
  p.H = {Matrix{{1.0}}};
  p.Q = Matrix{{1.0}};
  p.R = {Matrix{{1.0}}};
  p.x0 = Vector{{1.0}};
  return p;
}

TEST(SolveDare, ScalarZeroDynamics) {
  const RiccatiSolution sol = solve_dare(scalar_plant(0.0));
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-14);
}

TEST(SolveDare, ScalarGoldenRatio) {
  // P^2 - P - 1 = 0, K = -P / (1 + P)
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  const RiccatiSolution sol = solve_dare(scalar_plant(1.0));
  EXPECT_NEAR(sol.P(0, 0), golden, 1e-11);
  EXPECT_NEAR(sol.K(0, 0), -golden / (1.0 + golden), 1e-11);
  EXPECT_NEAR(sol.K(0, 0), -0.6180339887, 1e-9);
  EXPECT_NEAR(optimal_cost(sol, Vector{{1.0}}), golden, 1e-11);
}

TEST(SolveDare, ReferenceGain) {
  const PlantModel plant = fixtures::reference_plant();
  const RiccatiSolution sol = solve_dare(plant);
  EXPECT_LE(fixtures::max_abs_diff(sol.K, fixtures::reference_K()), 1e-3);
  ASSERT_EQ(sol.K_parts.size(), 2u);
  EXPECT_EQ(sol.K_parts[0], sol.K.topRows(1));
  EXPECT_EQ(sol.K_parts[1], sol.K.bottomRows(1));
  EXPECT_LT(spectral_radius(closed_loop_matrix(plant, sol)), 1.0);
}

TEST(SolveDare, ResidualRecheckedIndependently) {
  const PlantModel plant = fixtures::reference_plant();
  const RiccatiSolution sol = solve_dare(plant);
  const StackedForm f = stack(plant);
  const Matrix& p = sol.P;
  const Matrix rhs = plant.A.transpose() * p * plant.A + plant.Q -
                     plant.A.transpose() * p * f.B * (f.R + f.B.transpose() * p * f.B).inverse() *
                         f.B.transpose() * p * plant.A;
  EXPECT_LE(norm2(p - rhs), 1e-12 * (1.0 + norm2(p)));
  EXPECT_LE(sol.residual, 1e-12 * (1.0 + norm2(p)));
  EXPECT_EQ(p, p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(SolveDare, ValueIterationIsMonotone) {
  const PlantModel plant = fixtures::reference_plant();
  const StackedForm f = stack(plant);
  Matrix p = Matrix::Zero(2, 2);
  for (int k = 0; k < 60; ++k) {
    const Matrix next = riccati_step(plant.A, f.B, plant.Q, f.R, p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(next - p);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9) << "step " << k;
    p = next;
  }
}

TEST(SolveDare, AgreesWithDynamicProgrammingOracle) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> open_loop(0.5, 1.5);
  int checked = 0;
  for (int attempt = 0; checked < 20 && attempt < 200; ++attempt) {
    const auto shape = fixtures::random_shape(rng, 4, 3);
    const PlantModel plant = fixtures::random_plant(rng, shape, open_loop(rng));
    if (has_errors(validate(plant))) continue;
    const RiccatiSolution sol = solve_dare(plant);
    EXPECT_LE(fixtures::max_abs_diff(sol.P, fixtures::dare_dp_oracle(plant, 500)), 1e-8) << "attempt " << attempt;
    EXPECT_LT(spectral_radius(closed_loop_matrix(plant, sol)), 1.0);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(SolveDare, Preconditions) {
  PlantModel p = fixtures::reference_plant();
  p.B = {Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  EXPECT_THROW((void)solve_dare(p), PreconditionError);

  p = fixtures::reference_plant();
  p.R[0] = Matrix{{0.0}};
  EXPECT_THROW((void)solve_dare(p), PreconditionError);

  p = fixtures::reference_plant();
  p.Q = Matrix::Zero(2, 2);
  EXPECT_THROW((void)solve_dare(p), PreconditionError);

  p = fixtures::reference_plant();
  p.B[0] = Matrix::Zero(3, 1);
  EXPECT_THROW((void)solve_dare(p), DimensionError);

  // Observability of (A, H_i) is irrelevant to the Riccati solve.
  p = fixtures::reference_plant();
  p.H[0] = Matrix::Zero(1, 2);
  EXPECT_NO_THROW((void)solve_dare(p));
}

TEST(SolveDare, NonConvergenceCarriesResidual) {
  try {
    (void)solve_dare(fixtures::reference_plant(), 1e-12, 2);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  }
  EXPECT_THROW((void)solve_dare(fixtures::reference_plant(), 0.0), InputError);
}

TEST(OptimalCost, Examples) {
  const RiccatiSolution sol = solve_dare(fixtures::reference_plant());
  EXPECT_EQ(optimal_cost(sol, Vector::Zero(2)), 0.0);
  const Vector x{{1.0, -1.0}};
  EXPECT_NEAR(optimal_cost(sol, x), x.dot(sol.P * x), 1e-15);
  EXPECT_THROW((void)optimal_cost(sol, Vector::Zero(3)), DimensionError);
}

}  // namespace
}  // namespace declq
