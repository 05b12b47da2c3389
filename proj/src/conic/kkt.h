#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sagerel::conic::internal {

/// Factors and solves
///   [ D  A' ] [u]   [r]
///   [ A  0  ] [w] = [t]
/// where D is zero on free variables, diagonal on orthant variables and
/// 3×3 dense on each exponential-cone triple. The factorization is of the
/// quasi-definite regularized matrix; solutions are refined against the
/// unregularized one.
class KktSolver {
 public:
  KktSolver(const Eigen::SparseMatrix<double>& A, std::vector<int> lp_vars,
            std::vector<int> exp_starts);
  ~KktSolver();
  KktSolver(const KktSolver&) = delete;
  KktSolver& operator=(const KktSolver&) = delete;

  /// lp_w[k] scales lp_vars[k]; exp_w[k] is the block at exp_starts[k].
  bool Factor(const Eigen::VectorXd& lp_w,
              const std::vector<Eigen::Matrix3d>& exp_w);

  /// Solves in place; returns the final relative residual.
  double Solve(const Eigen::VectorXd& rhs, Eigen::VectorXd* sol) const;

 private:
  Eigen::VectorXd Apply(const Eigen::VectorXd& v) const;
  void SolveRegularized(const Eigen::VectorXd& rhs, Eigen::VectorXd* sol) const;
  bool FactorWith(double delta);

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sagerel::conic::internal
