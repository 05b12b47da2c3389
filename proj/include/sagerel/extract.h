#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sagerel/hierarchy.h"

namespace sagerel {

class ExtractionError : public std::runtime_error {
 public:
  enum class Kind { kMissingDual, kDegenerateNormalizer, kNoPoint };

  ExtractionError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Dual moments of a solved relaxation.
struct MomentVector {
  /// Raw duals of the coefficient-matching rows over res.lifted_support.
  Eigen::VectorXd lifted;
  std::vector<bool> observed;
  /// Exponents of the original problem and the moments there, scaled so the
  /// zero exponent has moment 1. Unobserved entries are 0.
  Eigen::MatrixXd exponents;
  Eigen::VectorXd values;
};

/// Throws ExtractionError (kMissingDual, kDegenerateNormalizer).
MomentVector MakeMomentVector(const RelaxationResult& res);

struct ExtractOptions {
  double point_tol = 1e-5;
  double tight_tol = 1e-4;
  double feas_tol = 1e-6;
  /// Entries at or below this are dropped from the fit.
  double positivity_floor = 1e-12;
};

struct Extraction {
  Eigen::VectorXd x;
  /// ‖A·x − log v̂‖₂ over the entries used in the fit.
  double residual = 0.0;
  double upper_bound = 0.0;
  /// g_i(x) for each constraint.
  Eigen::VectorXd constraint_values;
  bool feasible = true;
  bool tight = false;
};

/// Least-squares fit of A·x = log v̂ over the positive entries, evaluated on
/// `sp`. Throws ExtractionError(kNoPoint) when those entries do not determine x.
Extraction ExtractPoint(const MomentVector& mv, const SignomialProgram& sp, double lower_bound,
                        const ExtractOptions& options = {});

enum class TightnessVerdict { kTight, kGap, kUnknown };

std::string ToString(TightnessVerdict verdict);

struct TightnessReport {
  TightnessVerdict verdict = TightnessVerdict::kUnknown;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  double residual = 0.0;
  double max_violation = 0.0;
  std::optional<Extraction> extraction;
  std::string note;
};

/// Runs MakeMomentVector and ExtractPoint; any failure yields kUnknown with
/// the reason in `note`.
TightnessReport ReportTightness(const RelaxationResult& res, const SignomialProgram& sp,
                                const ExtractOptions& options = {});

}  // namespace sagerel
