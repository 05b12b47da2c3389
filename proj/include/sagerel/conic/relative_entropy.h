#pragma once

#include <span>
#include <vector>

#include "sagerel/conic/program.h"

namespace sagerel::conic {

/// Variables that encode Σ_j ν_j log(ν_j/λ_j) ≤ β. Coordinate j is the
/// exponential-cone triple (−t_j, ν_j, λ_j), i.e. ν_j log(ν_j/λ_j) ≤ t_j.
struct RelEntBlock {
  std::vector<ExpVar> cones;
  /// Nonnegative slack σ in Σ_j t_j + σ = β.
  int slack = -1;

  int size() const { return static_cast<int>(cones.size()); }
  /// −t_j; the cone's first coordinate.
  int neg_t(int j) const { return cones[j].x; }
  int nu(int j) const { return cones[j].y; }
  int lambda(int j) const { return cones[j].z; }
};

/// Ties each ν_j and λ_j to the given affine expressions and adds the bound
/// Σ_j t_j ≤ β. Throws std::invalid_argument on length mismatch.
RelEntBlock AddRelativeEntropy(ProgramBuilder* builder,
                               std::span<const LinearExpr> nu,
                               std::span<const LinearExpr> lambda,
                               const LinearExpr& beta);

/// As above with ν and λ left as the fresh cone coordinates.
RelEntBlock AddRelativeEntropy(ProgramBuilder* builder, int count,
                               const LinearExpr& beta);

/// Σ_j ν_j log(ν_j/λ_j) with 0·log(0/λ) = 0; +∞ if some ν_j > 0 = λ_j.
double RelativeEntropy(std::span<const double> nu, std::span<const double> lambda);

}  // namespace sagerel::conic
