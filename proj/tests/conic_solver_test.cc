#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sagerel/conic/exp_cone.h"
#include "sagerel/conic/program.h"
#include "sagerel/conic/relative_entropy.h"
#include "sagerel/conic/solver.h"

namespace sagerel::conic {
namespace {

TEST(ConicSolverTest, OneDimensionalLp) {
  // min x s.t. x − s = 1, s ≥ 0, x free.
  ProgramBuilder b;
  const int x = b.AddFree();
  const int s = b.AddNonneg();
  b.AddEquality(LinearExpr::Var(x) - LinearExpr::Var(s), 1.0);
  b.AddObjective(LinearExpr::Var(x));
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.z(x), 1.0, 1e-7);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-7);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
}

TEST(ConicSolverTest, ExpConeBoundary) {
  ProgramBuilder b;
  const ExpVar e = b.AddExp();
  b.AddEquality(LinearExpr::Var(e.x), 0.0);
  b.AddEquality(LinearExpr::Var(e.y), 1.0);
  b.AddObjective(LinearExpr::Var(e.z));
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.z(e.z), 1.0, 1e-7);
}

TEST(ConicSolverTest, DetectsPrimalInfeasibility) {
  ProgramBuilder b;
  LinearExpr sum;
  for (int i = 0; i < 3; ++i) sum.AddTerm(b.AddNonneg(), 1.0);
  b.AddEquality(sum, -1.0);
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kPrimalInfeasible);
  EXPECT_NEAR(sol.y(0), -1.0, 1e-7);
}

TEST(ConicSolverTest, GeometricProgramDual) {
  // max −D(ν, e·1) s.t. ν ≥ 0, ν = (0.6, 0.4)·(1'ν). Along ν = s·ν̂ the
  // objective is −s(h + log s − 1) with h = Σ ν̂ log ν̂, maximised at
  // s = e^{−h} with value e^{−h}.
  const double eps = 0.1;
  const Eigen::Vector2d w(0.5 + eps, 0.5 - eps);
  ProgramBuilder b;
  const RelEntBlock re = AddRelativeEntropy(&b, 2, LinearExpr::Var(b.AddFree()));
  LinearExpr total = LinearExpr::Var(re.nu(0)) + LinearExpr::Var(re.nu(1));
  for (int j = 0; j < 2; ++j) {
    b.AddEquality(LinearExpr::Var(re.lambda(j)), std::exp(1.0));
    b.AddEquality(LinearExpr::Var(re.nu(j)) - w(j) * total);
  }
  // β is the first variable declared; minimise it.
  b.AddObjective(LinearExpr::Var(0));
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  const double h = w(0) * std::log(w(0)) + w(1) * std::log(w(1));
  const double expect = std::exp(-h);
  EXPECT_NEAR(-sol.primal_objective, expect, 1e-7);
  EXPECT_GE(-sol.primal_objective, -h - 1e-9);
  EXPECT_NEAR(sol.z(re.nu(0)) / (sol.z(re.nu(0)) + sol.z(re.nu(1))), 0.6, 1e-7);
}

TEST(ConicSolverTest, WeakDualityAndWarmStartReproduce) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    // min Σ t_j s.t. ν log(ν/λ) ≤ t_j with random fixed ν, λ and a free shift.
    ProgramBuilder b;
    const int shift = b.AddFree();
    const RelEntBlock re = AddRelativeEntropy(&b, 3, LinearExpr::Var(shift));
    double closed = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double nu = u(rng);
      const double lambda = u(rng);
      closed += nu * std::log(nu / lambda);
      b.AddEquality(LinearExpr::Var(re.nu(j)), nu);
      b.AddEquality(LinearExpr::Var(re.lambda(j)), lambda);
    }
    b.AddObjective(LinearExpr::Var(shift));
    const ConicProgram prog = b.Build();
    const ConicSolution sol = Solve(prog);
    ASSERT_EQ(sol.status, SolveStatus::kOptimal);
    EXPECT_NEAR(sol.primal_objective, closed, 1e-8) << sol.iterations;
    EXPECT_GE(sol.primal_objective - sol.dual_objective,
              -1e-9 * (1.0 + std::abs(sol.primal_objective)));

    SolverOptions warm;
    warm.warm_start = sol.z;
    const ConicSolution again = Solve(prog, warm);
    ASSERT_EQ(again.status, SolveStatus::kOptimal);
    EXPECT_NEAR(again.primal_objective, sol.primal_objective, 1e-8) << again.iterations;
  }
}

// Fixes all three coordinates and asks the solver whether the point is in K.
SolveStatus PointStatus(const Eigen::Vector3d& p) {
  ProgramBuilder b;
  const ExpVar e = b.AddExp();
  b.AddEquality(LinearExpr::Var(e.x), p(0));
  b.AddEquality(LinearExpr::Var(e.y), p(1));
  b.AddEquality(LinearExpr::Var(e.z), p(2));
  return Solve(b.Build()).status;
}

bool AnalyticMember(const Eigen::Vector3d& p) {
  if (p(1) > 0.0) return p(1) * std::exp(p(0) / p(1)) <= p(2) * (1.0 + 1e-8);
  return p(1) == 0.0 && p(0) <= 0.0 && p(2) >= 0.0;
}

TEST(ConicSolverTest, ExpConeMembershipAgreesWithAnalyticTest) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int inside = 0;
  int ambiguous = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    const bool member = AnalyticMember(p);
    EXPECT_EQ(exp_cone::InClosure(p, 1e-8), member);
    const SolveStatus st = PointStatus(p);
    if (st != SolveStatus::kOptimal && st != SolveStatus::kPrimalInfeasible) {
      // Only acceptable right at the boundary.
      ++ambiguous;
      EXPECT_LT(std::abs(p(1) * std::exp(p(0) / p(1)) - p(2)), 1e-6) << p.transpose();
      continue;
    }
    EXPECT_EQ(st == SolveStatus::kOptimal, member) << p.transpose();
    inside += member;
  }
  EXPECT_GT(inside, 50);
  EXPECT_EQ(ambiguous, 0);
}

TEST(ConicSolverTest, ClosureRays) {
  EXPECT_EQ(PointStatus(Eigen::Vector3d(-1.0, 0.0, 2.0)), SolveStatus::kOptimal);
  EXPECT_EQ(PointStatus(Eigen::Vector3d(0.0, 0.0, 0.0)), SolveStatus::kOptimal);
  EXPECT_EQ(PointStatus(Eigen::Vector3d(1.0, 0.0, 2.0)), SolveStatus::kPrimalInfeasible);
}

TEST(ConicSolverTest, DetectsDualInfeasibility) {
  // min −x s.t. x − y = 0 with x, y ≥ 0 is unbounded.
  ProgramBuilder b;
  const int x = b.AddNonneg();
  const int y = b.AddNonneg();
  b.AddEquality(LinearExpr::Var(x) - LinearExpr::Var(y));
  b.AddObjective(LinearExpr::Var(x, -1.0));
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kDualInfeasible);
  EXPECT_NEAR(-sol.z(x), -1.0, 1e-7);
}

TEST(ConicSolverTest, PoorlyScaledLp) {
  // min x1 + x2 s.t. 1e4·x1 + 1e-3·x2 = 1e4, x ≥ 0; optimum x = (1, 0).
  ProgramBuilder b;
  const int x1 = b.AddNonneg();
  const int x2 = b.AddNonneg();
  b.AddEquality(1e4 * LinearExpr::Var(x1) + 1e-3 * LinearExpr::Var(x2), 1e4);
  b.AddObjective(LinearExpr::Var(x1) + LinearExpr::Var(x2));
  const ConicSolution sol = Solve(b.Build());
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
}

TEST(ConicSolverTest, EmptyRowPresolve) {
  ProgramBuilder b;
  const int x = b.AddNonneg();
  b.AddEquality(LinearExpr::Var(x), 2.0);
  b.AddEquality(LinearExpr(0.0), 0.0);
  b.AddObjective(LinearExpr::Var(x));
  const ConicSolution ok = Solve(b.Build());
  ASSERT_EQ(ok.status, SolveStatus::kOptimal);
  EXPECT_NEAR(ok.primal_objective, 2.0, 1e-7);

  ProgramBuilder bad;
  bad.AddNonneg();
  bad.AddEquality(LinearExpr(0.0), 1.0);
  EXPECT_EQ(Solve(bad.Build()).status, SolveStatus::kPrimalInfeasible);
}

TEST(ConicSolverTest, RejectsMalformedProgram) {
  ConicProgram p;
  p.c = Eigen::VectorXd::Zero(2);
  p.A.resize(1, 2);
  p.b = Eigen::VectorXd::Zero(1);
  p.blocks = {{ConeKind::kExp, 0, 2}};
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

Eigen::Vector3d FiniteGradient(const Eigen::Vector3d& s) {
  auto f = [](const Eigen::Vector3d& p) {
    return -std::log(p(1) * std::log(p(2) / p(1)) - p(0)) - std::log(p(1)) - std::log(p(2));
  };
  Eigen::Vector3d g;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(k) = 1e-6;
    g(k) = (f(s + e) - f(s - e)) / 2e-6;
  }
  return g;
}

TEST(ExpConeTest, BarrierDerivativesMatchFiniteDifferences) {
  const Eigen::Vector3d s(-0.7, 0.9, 1.6);
  ASSERT_TRUE(exp_cone::InPrimalInterior(s));
  EXPECT_LT((exp_cone::Gradient(s) - FiniteGradient(s)).norm(), 1e-6);

  Eigen::Matrix3d h;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(k) = 1e-6;
    h.col(k) = (exp_cone::Gradient(s + e) - exp_cone::Gradient(s - e)) / 2e-6;
  }
  EXPECT_LT((exp_cone::Hessian(s) - h).norm(), 1e-5 * h.norm());

  const Eigen::Vector3d u(0.3, -0.2, 0.5);
  const Eigen::Vector3d d3 =
      (exp_cone::Hessian(s + 1e-6 * u) - exp_cone::Hessian(s - 1e-6 * u)) * u / 2e-6;
  EXPECT_LT((exp_cone::ThirdOrder(s, u) - d3).norm(), 1e-5 * d3.norm());

  const Eigen::Vector3d r(1.0, -2.0, 0.5);
  EXPECT_LT((exp_cone::Hessian(s) * exp_cone::InverseHessianProduct(s, r) - r).norm(), 1e-10);
}

TEST(ExpConeTest, CentralPointIsSelfDual) {
  const Eigen::Vector3d c = exp_cone::CentralPoint();
  EXPECT_TRUE(exp_cone::InPrimalInterior(c));
  EXPECT_TRUE(exp_cone::InDualInterior(c));
  EXPECT_LT((c + exp_cone::Gradient(c)).norm(), 1e-12);
  // Logarithmic homogeneity: s·∇F(s) = −3.
  const Eigen::Vector3d s(0.2, 1.1, 3.0);
  EXPECT_NEAR(s.dot(exp_cone::Gradient(s)), -3.0, 1e-12);
}

TEST(ExpConeTest, DualInteriorSamples) {
  EXPECT_TRUE(exp_cone::InDualInterior(Eigen::Vector3d(-1.0, 0.0, 1.0)));
  EXPECT_FALSE(exp_cone::InDualInterior(Eigen::Vector3d(-1.0, 0.0, 0.3)));
  EXPECT_FALSE(exp_cone::InDualInterior(Eigen::Vector3d(1.0, 0.0, 5.0)));
}

}  // namespace
}  // namespace sagerel::conic
