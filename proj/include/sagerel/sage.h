#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sagerel/conic/program.h"
#include "sagerel/conic/relative_entropy.h"
#include "sagerel/conic/solver.h"
#include "sagerel/signomial.h"

namespace sagerel {

/// ν ≥ 0 over the non-designated terms with Σ_j α_j ν_j = (1'ν)·α₀ and
/// D(ν, e·c) ≤ β, witnessing β·e^{α₀·x} + Σ_j c_j e^{α_j·x} ≥ 0.
struct AgeCertificate {
  Eigen::VectorXd nu;
  /// D(ν, e·c) − β; nonpositive for a valid certificate.
  double slack = 0.0;
};

enum class AgeVerdict { kFeasible, kInfeasible, kIndeterminate };

struct AgeResult {
  AgeVerdict verdict = AgeVerdict::kIndeterminate;
  std::optional<AgeCertificate> certificate;
  conic::SolveStatus status = conic::SolveStatus::kNumericalFailure;
};

/// Decides membership of (β, c) in the AGE cone with designated exponent α₀.
/// `c` must be nonnegative; rows of `exponents` pair with entries of `c`.
AgeResult AgeCertify(const Eigen::Ref<const Eigen::VectorXd>& c, double beta,
                     const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                     const Eigen::Ref<const Eigen::VectorXd>& designated,
                     const conic::SolverOptions& options = {});

/// When α₀ lies outside conv(exponents) the AGE condition reduces to β ≥ 0;
/// returns that verdict, or nullopt when α₀ is in the hull.
std::optional<AgeVerdict> AgeFastPath(const Eigen::Ref<const Eigen::VectorXd>& designated,
                                      const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                                      double beta);

/// A SAGE decomposition c = Σ_i c^(i) over a fixed support. For every i,
/// c^(i) is nonnegative off i, ν^(i) is nonnegative off i with
/// ν^(i)_i = −Σ_{j≠i} ν^(i)_j, Σ_j α_j ν^(i)_j = 0 and
/// D(ν^(i)_{\i}, e·c^(i)_{\i}) ≤ c^(i)_i.
struct SageCertificate {
  Eigen::MatrixXd exponents;
  std::vector<Eigen::VectorXd> parts;
  std::vector<Eigen::VectorXd> nus;

  int size() const { return static_cast<int>(exponents.rows()); }
  Eigen::VectorXd Total() const;
};

/// Recomputes every certificate condition with direct relative-entropy
/// evaluation. Coefficients of `f` are matched to the certificate support
/// by exponent; support entries absent from `f` count as zero.
bool VerifyCertificate(const SageCertificate& cert, const Signomial& f, double tol);

/// Variables of a SAGE membership constraint compiled into a program.
struct SageConstraint {
  struct Block {
    int index;
    std::vector<int> others;
    std::vector<conic::ExpVar> cones;  // (u, ν, λ) with ν log(ν/λ) ≤ −u
  };

  Eigen::MatrixXd support;
  /// Terms that take part; the rest have identically zero coefficients.
  std::vector<bool> active;
  /// Row of the coefficient-matching equality per term, −1 when inactive.
  std::vector<int> coeff_rows;
  /// Nonnegative residual r_k per term, −1 when inactive.
  std::vector<int> residuals;
  std::vector<Block> blocks;

  /// Builds the certificate from a primal point of the program.
  SageCertificate Certificate(const Eigen::Ref<const Eigen::VectorXd>& z) const;
};

/// Adds constraints forcing Σ_k coeffs[k]·e^{support_k·x} into the SAGE cone.
/// Splits are generated only for non-extremal active terms; a term whose
/// coefficient is the constant 0 takes no part.
SageConstraint AddSageConstraint(conic::ProgramBuilder* builder,
                                 const Eigen::Ref<const Eigen::MatrixXd>& support,
                                 std::span<const conic::LinearExpr> coeffs);

enum class SageVerdict { kSage, kNotSage, kIndeterminate };

struct SageResult {
  SageVerdict verdict = SageVerdict::kIndeterminate;
  std::optional<SageCertificate> certificate;
  /// For kNotSage: v in the dual SAGE cone over the support with c·v = −1.
  Eigen::VectorXd dual_ray;
  conic::SolveStatus status = conic::SolveStatus::kNumericalFailure;
  int iterations = 0;
};

/// SAGE membership of f over its own exponents.
SageResult SageCertify(const Signomial& f, const conic::SolverOptions& options = {});

/// SAGE membership of f over `support` (rows), which must contain every
/// exponent of f; missing support coefficients are zero.
SageResult SageCertify(const Signomial& f, const Eigen::Ref<const Eigen::MatrixXd>& support,
                       const conic::SolverOptions& options = {});

/// Largest t with f − t·Σ_k e^{α_k·x} ∈ SAGE over f's exponents; nonnegative
/// exactly when f is SAGE. Returns nullopt if the solve does not converge.
std::optional<double> SageMargin(const Signomial& f, const conic::SolverOptions& options = {});

/// Witnesses v_i log(v_i/v_j) ≤ (α_i − α_j)·τ^(i) for all i ≠ j.
struct DualConeWitness {
  Eigen::VectorXd v;
  std::vector<Eigen::VectorXd> taus;
};

enum class DualVerdict { kInside, kOutside, kIndeterminate };

struct DualMembership {
  DualVerdict verdict = DualVerdict::kIndeterminate;
  std::optional<DualConeWitness> witness;
};

/// Tests v ∈ C*_SAGE for the given exponents (rows). A pair with v_i > 0 and
/// v_j = 0 is treated as Outside.
DualMembership CheckDualMembership(const Eigen::Ref<const Eigen::VectorXd>& v,
                                   const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                                   const conic::SolverOptions& options = {});

/// Largest violation of the witness inequalities (≤ 0 when all hold).
double DualWitnessViolation(const DualConeWitness& w,
                            const Eigen::Ref<const Eigen::MatrixXd>& exponents);

}  // namespace sagerel
