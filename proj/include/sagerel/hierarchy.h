#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sagerel/conic/solver.h"
#include "sagerel/sage.h"
#include "sagerel/signomial.h"

namespace sagerel {

/// min f(x) s.t. g_i(x) ≥ 0.
struct SignomialProgram {
  Signomial objective;
  std::vector<Signomial> constraints;

  int num_vars() const { return objective.num_vars(); }
  /// Zero exponent first, then the objective's and constraints' exponents in
  /// order of first appearance.
  Eigen::MatrixXd Support() const;
  /// Throws std::invalid_argument if dimensions disagree.
  void Validate() const;
};

enum class BoundStatus {
  kOptimal,
  /// f is unbounded below on R^n (a vertex of its Newton polytope carries a
  /// negative coefficient).
  kMinusInfinity,
  /// No γ admits a certificate at this level.
  kNoBound,
  /// Every γ admits a certificate; the constraint set is certified empty.
  kPlusInfinity,
  kIndeterminate,
};

std::string ToString(BoundStatus status);

struct HierarchyOptions {
  conic::SolverOptions solver;
  std::size_t term_limit = kDefaultTermLimit;
};

struct RelaxationResult {
  int p = 0;
  std::optional<int> q;
  BoundStatus status = BoundStatus::kIndeterminate;
  conic::SolveStatus solver_status = conic::SolveStatus::kNumericalFailure;
  int iterations = 0;
  double lower_bound = std::numeric_limits<double>::quiet_NaN();

  /// Lifted support of the certified signomial; row 0 is the zero exponent.
  Eigen::MatrixXd lifted_support;
  /// Certified signomial's coefficients over lifted_support at the optimum.
  Eigen::VectorXd lifted_coeffs;
  std::optional<SageCertificate> certificate;

  /// Products h ∈ R_q(C) and their multipliers s_h (constrained levels).
  std::vector<Signomial> products;
  std::vector<Signomial> multipliers;

  /// Equality-row duals of the coefficient-matching rows, with
  /// moments_observed[k] false for terms that took no part.
  Eigen::VectorXd moments;
  std::vector<bool> moments_observed;

  /// Exponents of the original problem (objective and constraints).
  Eigen::MatrixXd base_support;
  /// For each base exponent, its row in lifted_support.
  std::vector<int> base_rows;

  bool optimal() const { return status == BoundStatus::kOptimal; }
};

/// Largest γ with (Σ_{b} e^{b·x})^p · (f − γ) ∈ SAGE, b ranging over {0} ∪
/// exponents(f).
RelaxationResult UnconstrainedBound(const Signomial& f, int p,
                                    const HierarchyOptions& options = {});

/// All products of q factors drawn from {1} ∪ C, deduplicated; the constant
/// 1 comes first.
std::vector<Signomial> Products(const std::vector<Signomial>& constraints, int q,
                                std::size_t term_limit = kDefaultTermLimit);

/// Largest γ with f − γ − Σ_{h ∈ R_q(C)} s_h·h ∈ SAGE(E_{p+q}) and
/// s_h ∈ SAGE(E_p), exponents taken from the program's support. q = 0 falls
/// back to UnconstrainedBound.
RelaxationResult ConstrainedBound(const SignomialProgram& sp, int p, int q,
                                  const HierarchyOptions& options = {});

/// Appends U − e^{α·x} ≥ 0 and e^{α·x} − L ≥ 0 for every distinct exponent α
/// of the objective and constraints. Requires 0 < L ≤ U < ∞.
SignomialProgram AddBoxConstraints(const SignomialProgram& sp, double upper, double lower);

/// Exponent conditions under which some level p certifies a strictly
/// positive f, evaluated on f's terms in stored order: the first n exponents
/// are linearly independent with positive coefficients, term n is the zero
/// exponent, and every later exponent lies in conv{α_1..α_n, 0} but not in
/// conv{α_1..α_n}. Reported only; no computation depends on them.
struct ConvergenceConditions {
  bool independent = false;
  bool zero_present = false;
  bool remaining_interior = false;
  bool leading_positive = false;

  bool all() const {
    return independent && zero_present && remaining_interior && leading_positive;
  }
};
ConvergenceConditions CheckConvergenceConditions(const Signomial& f, double tol = 1e-9);

/// Signomial whose coefficients over `lifted_support` are `coeffs`.
Signomial LiftedSignomial(const RelaxationResult& res);

}  // namespace sagerel
