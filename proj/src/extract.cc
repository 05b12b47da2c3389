#include "sagerel/extract.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sagerel {

MomentVector MakeMomentVector(const RelaxationResult& res) {
  const int ell = static_cast<int>(res.lifted_support.rows());
  if (!res.optimal() || res.moments.size() != ell || ell == 0 ||
      static_cast<int>(res.moments_observed.size()) != ell || !res.moments_observed[0]) {
    throw ExtractionError(ExtractionError::Kind::kMissingDual,
                          "relaxation carries no dual moments");
  }
  const double v0 = res.moments(0);
  if (!(v0 > 1e-12)) {
    throw ExtractionError(ExtractionError::Kind::kDegenerateNormalizer,
                          "moment at the zero exponent is not positive");
  }
  MomentVector mv;
  mv.lifted = res.moments;
  mv.observed = res.moments_observed;
  mv.exponents = res.base_support;
  const int m = static_cast<int>(res.base_support.rows());
  mv.values = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) {
    const int k = res.base_rows[j];
    if (k >= 0 && res.moments_observed[k]) mv.values(j) = res.moments(k) / v0;
  }
  return mv;
}

Extraction ExtractPoint(const MomentVector& mv, const SignomialProgram& sp, double lower_bound,
                        const ExtractOptions& options) {
  const int n = static_cast<int>(mv.exponents.cols());
  std::vector<int> rows;
  for (int j = 0; j < mv.values.size(); ++j) {
    if (mv.values(j) > options.positivity_floor) rows.push_back(j);
  }
  Eigen::MatrixXd a(rows.size(), n);
  Eigen::VectorXd b(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    a.row(r) = mv.exponents.row(rows[r]);
    b(r) = std::log(mv.values(rows[r]));
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (rows.empty() || qr.rank() < n) {
    throw ExtractionError(ExtractionError::Kind::kNoPoint,
                          "positive moments do not determine a point");
  }
  Extraction out;
  out.x = qr.solve(b);
  out.residual = (a * out.x - b).norm();
  out.upper_bound = sp.objective.Evaluate(out.x);
  out.constraint_values.resize(sp.constraints.size());
  for (size_t i = 0; i < sp.constraints.size(); ++i) {
    out.constraint_values(i) = sp.constraints[i].Evaluate(out.x);
    out.feasible = out.feasible && out.constraint_values(i) >= -options.feas_tol;
  }
  out.tight = out.upper_bound - lower_bound <= options.tight_tol &&
              out.residual <= options.point_tol && out.feasible;
  return out;
}

std::string ToString(TightnessVerdict verdict) {
  switch (verdict) {
    case TightnessVerdict::kTight:
      return "Tight";
    case TightnessVerdict::kGap:
      return "Gap";
    case TightnessVerdict::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

TightnessReport ReportTightness(const RelaxationResult& res, const SignomialProgram& sp,
                                const ExtractOptions& options) {
  TightnessReport report;
  report.lower_bound = res.lower_bound;
  if (!res.optimal()) {
    report.note = "relaxation status " + ToString(res.status);
    return report;
  }
  try {
    const Extraction ext = ExtractPoint(MakeMomentVector(res), sp, res.lower_bound, options);
    report.upper_bound = ext.upper_bound;
    report.gap = ext.upper_bound - res.lower_bound;
    report.residual = ext.residual;
    if (ext.constraint_values.size() > 0) {
      report.max_violation = std::max(0.0, -ext.constraint_values.minCoeff());
    }
    if (!ext.feasible) report.note = "extracted point violates a constraint";
    report.verdict = ext.tight ? TightnessVerdict::kTight : TightnessVerdict::kGap;
    report.extraction = ext;
  } catch (const ExtractionError& e) {
    report.note = e.what();
  }
  return report;
}

}  // namespace sagerel
