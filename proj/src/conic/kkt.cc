#include "kkt.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace sagerel::conic::internal {

using SpMat = Eigen::SparseMatrix<double>;

struct KktSolver::Impl {
  int n = 0;
  int m = 0;
  SpMat A;
  SpMat At;
  std::vector<int> lp_vars;
  std::vector<int> exp_starts;

  SpMat K;  // lower triangle
  std::vector<int> diag_pos;
  std::vector<std::array<int, 3>> exp_offdiag_pos;
  std::vector<int> a_pos;

  Eigen::VectorXd d_lp;
  std::vector<Eigen::Matrix3d> d_exp;

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;
  bool use_lu = false;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  double delta = 0.0;
};

namespace {

int FindPos(const SpMat& K, int row, int col) {
  const int* inner = K.innerIndexPtr();
  const int begin = K.outerIndexPtr()[col];
  const int end = K.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(inner + begin, inner + end, row);
  return static_cast<int>(it - inner);
}

}  // namespace

KktSolver::KktSolver(const SpMat& A, std::vector<int> lp_vars,
                     std::vector<int> exp_starts)
    : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  s.n = static_cast<int>(A.cols());
  s.m = static_cast<int>(A.rows());
  s.A = A;
  s.At = A.transpose();
  s.lp_vars = std::move(lp_vars);
  s.exp_starts = std::move(exp_starts);

  const int dim = s.n + s.m;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(dim + 3 * s.exp_starts.size() + A.nonZeros());
  for (int i = 0; i < dim; ++i) trips.emplace_back(i, i, 1.0);
  for (int st : s.exp_starts) {
    trips.emplace_back(st + 1, st, 1.0);
    trips.emplace_back(st + 2, st, 1.0);
    trips.emplace_back(st + 2, st + 1, 1.0);
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trips.emplace_back(s.n + it.row(), it.col(), 1.0);
    }
  }
  s.K.resize(dim, dim);
  s.K.setFromTriplets(trips.begin(), trips.end());
  s.K.makeCompressed();

  s.diag_pos.resize(dim);
  for (int i = 0; i < dim; ++i) s.diag_pos[i] = FindPos(s.K, i, i);
  for (int st : s.exp_starts) {
    s.exp_offdiag_pos.push_back({FindPos(s.K, st + 1, st),
                                 FindPos(s.K, st + 2, st),
                                 FindPos(s.K, st + 2, st + 1)});
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      s.a_pos.push_back(FindPos(s.K, s.n + it.row(), it.col()));
    }
  }
}

KktSolver::~KktSolver() = default;

bool KktSolver::FactorWith(double delta) {
  Impl& s = *impl_;
  double* val = s.K.valuePtr();
  std::fill(val, val + s.K.nonZeros(), 0.0);
  for (int i = 0; i < s.n; ++i) val[s.diag_pos[i]] = delta;
  for (int i = 0; i < s.m; ++i) val[s.diag_pos[s.n + i]] = -delta;
  for (size_t k = 0; k < s.lp_vars.size(); ++k) {
    val[s.diag_pos[s.lp_vars[k]]] += s.d_lp(k);
  }
  for (size_t k = 0; k < s.exp_starts.size(); ++k) {
    const int st = s.exp_starts[k];
    const Eigen::Matrix3d& w = s.d_exp[k];
    for (int j = 0; j < 3; ++j) val[s.diag_pos[st + j]] += w(j, j);
    val[s.exp_offdiag_pos[k][0]] = w(1, 0);
    val[s.exp_offdiag_pos[k][1]] = w(2, 0);
    val[s.exp_offdiag_pos[k][2]] = w(2, 1);
  }
  int p = 0;
  for (int k = 0; k < s.A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s.A, k); it; ++it) val[s.a_pos[p++]] = it.value();
  }

  if (!s.analyzed) {
    s.ldlt.analyzePattern(s.K);
    s.analyzed = true;
  }
  s.ldlt.factorize(s.K);
  if (s.ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd& d = s.ldlt.vectorD();
  int pos = 0, neg = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d(i))) return false;
    if (d(i) > 0) ++pos;
    if (d(i) < 0) ++neg;
  }
  return pos == s.n && neg == s.m;
}

bool KktSolver::Factor(const Eigen::VectorXd& lp_w,
                       const std::vector<Eigen::Matrix3d>& exp_w) {
  Impl& s = *impl_;
  s.d_lp = lp_w;
  s.d_exp = exp_w;
  s.use_lu = false;
  for (double delta = 1e-12; delta <= 1e-4; delta *= 100.0) {
    if (FactorWith(delta)) {
      s.delta = delta;
      return true;
    }
  }
  // Indefinite or singular beyond regularization: fall back to LU on the
  // full symmetric matrix with a small regularization.
  FactorWith(1e-9);
  SpMat full = s.K.selfadjointView<Eigen::Lower>();
  full.makeCompressed();
  s.lu.analyzePattern(full);
  s.lu.factorize(full);
  if (s.lu.info() != Eigen::Success) return false;
  s.use_lu = true;
  return true;
}

Eigen::VectorXd KktSolver::Apply(const Eigen::VectorXd& v) const {
  const Impl& s = *impl_;
  Eigen::VectorXd out(s.n + s.m);
  const auto vx = v.head(s.n);
  const auto vy = v.tail(s.m);
  Eigen::VectorXd top = s.At * vy;
  for (size_t k = 0; k < s.lp_vars.size(); ++k) {
    top(s.lp_vars[k]) += s.d_lp(k) * vx(s.lp_vars[k]);
  }
  for (size_t k = 0; k < s.exp_starts.size(); ++k) {
    const int st = s.exp_starts[k];
    top.segment<3>(st) += s.d_exp[k] * vx.segment<3>(st);
  }
  out.head(s.n) = top;
  out.tail(s.m) = s.A * vx;
  return out;
}

void KktSolver::SolveRegularized(const Eigen::VectorXd& rhs,
                                 Eigen::VectorXd* sol) const {
  if (impl_->use_lu) {
    *sol = impl_->lu.solve(rhs);
  } else {
    *sol = impl_->ldlt.solve(rhs);
  }
}

double KktSolver::Solve(const Eigen::VectorXd& rhs, Eigen::VectorXd* sol) const {
  SolveRegularized(rhs, sol);
  const double rnorm = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd best = *sol;
  double best_res = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 20; ++iter) {
    const Eigen::VectorXd res = rhs - Apply(*sol);
    const double nr = res.lpNorm<Eigen::Infinity>() / rnorm;
    if (!(nr < best_res)) break;
    best = *sol;
    best_res = nr;
    if (nr < 1e-15) break;
    Eigen::VectorXd corr;
    SolveRegularized(res, &corr);
    *sol += corr;
  }
  *sol = best;
  return best_res;
}

}  // namespace sagerel::conic::internal
