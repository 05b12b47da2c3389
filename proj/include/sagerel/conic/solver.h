#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "sagerel/conic/program.h"

namespace sagerel::conic {

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  double infeas_tol = 1e-8;
  int max_iters = 200;
  /// On stagnation, a point meeting the tolerances scaled by this factor is
  /// reported as kAlmostOptimal.
  double reduced_accuracy_factor = 100.0;
  bool verbose = false;
  /// Optional primal guess; only its free-variable entries are used.
  std::optional<Eigen::VectorXd> warm_start;
};

enum class SolveStatus {
  kOptimal,
  kAlmostOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kMaxIterations,
  kNumericalFailure,
};

std::string ToString(SolveStatus status);

/// Primal and dual of
///   min c'z s.t. Az = b, z ∈ K      and      max b'y s.t. c − A'y = s ∈ K*.
/// For kPrimalInfeasible, (y, s) is a ray with b'y = 1, s = −A'y ∈ K*.
/// For kDualInfeasible, z is a ray with c'z = −1, Az = 0, z ∈ K.
struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;

  bool optimal() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kAlmostOptimal;
  }
};

/// Homogeneous self-dual interior-point method over free, nonnegative and
/// exponential-cone blocks.
ConicSolution Solve(const ConicProgram& program,
                    const SolverOptions& options = {});

}  // namespace sagerel::conic
