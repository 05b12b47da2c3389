#include "sagerel/conic/relative_entropy.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sagerel::conic {

RelEntBlock AddRelativeEntropy(ProgramBuilder* builder, int count,
                               const LinearExpr& beta) {
  if (count < 0) throw std::invalid_argument("AddRelativeEntropy: negative count");
  RelEntBlock blk;
  LinearExpr sum_t;
  for (int j = 0; j < count; ++j) {
    blk.cones.push_back(builder->AddExp());
    sum_t.AddTerm(blk.cones.back().x, -1.0);
  }
  blk.slack = builder->AddNonneg();
  sum_t.AddTerm(blk.slack, 1.0);
  builder->AddEquality(sum_t, beta);
  return blk;
}

RelEntBlock AddRelativeEntropy(ProgramBuilder* builder,
                               std::span<const LinearExpr> nu,
                               std::span<const LinearExpr> lambda,
                               const LinearExpr& beta) {
  if (nu.size() != lambda.size()) {
    throw std::invalid_argument("AddRelativeEntropy: ν and λ slot counts differ");
  }
  RelEntBlock blk = AddRelativeEntropy(builder, static_cast<int>(nu.size()), beta);
  for (size_t j = 0; j < nu.size(); ++j) {
    builder->AddEquality(LinearExpr::Var(blk.nu(j)), nu[j]);
    builder->AddEquality(LinearExpr::Var(blk.lambda(j)), lambda[j]);
  }
  return blk;
}

double RelativeEntropy(std::span<const double> nu, std::span<const double> lambda) {
  if (nu.size() != lambda.size()) {
    throw std::invalid_argument("RelativeEntropy: length mismatch");
  }
  double total = 0.0;
  for (size_t j = 0; j < nu.size(); ++j) {
    if (nu[j] == 0.0) continue;
    if (nu[j] < 0.0 || lambda[j] < 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (lambda[j] == 0.0) return std::numeric_limits<double>::infinity();
    total += nu[j] * std::log(nu[j] / lambda[j]);
  }
  return total;
}

}  // namespace sagerel::conic
