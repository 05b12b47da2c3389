#include "sagerel/conic/solver.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "kkt.h"
#include "sagerel/conic/exp_cone.h"

namespace sagerel::conic {

std::string ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kAlmostOptimal:
      return "AlmostOptimal";
    case SolveStatus::kPrimalInfeasible:
      return "PrimalInfeasible";
    case SolveStatus::kDualInfeasible:
      return "DualInfeasible";
    case SolveStatus::kMaxIterations:
      return "MaxIterations";
    case SolveStatus::kNumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxNeighborhood = 0.99;
// Once optimal, a few more steps toward tolerances tightened by this factor.
constexpr double kPolishFactor = 0.1;
constexpr int kPolishIters = 5;
constexpr std::array<double, 19> kStepSchedule = {
    0.9999, 0.999, 0.997, 0.99, 0.98, 0.97, 0.95, 0.9, 0.85, 0.8,
    0.7,    0.6,   0.5,   0.4,  0.3,  0.2,  0.1,  0.05, 0.0};

// The homogeneous self-dual embedding
//   A'y − z + cτ = 0,  −Ax + bτ = 0,  −c'x − b'y − κ = 0,
//   x_K ∈ K, z_K ∈ K*, z_free = 0, τ, κ ≥ 0.
// The point (x/τ, −y/τ, z/τ) solves the scaled problem when τ > 0.
struct Iterate {
  VectorXd x;
  VectorXd y;
  VectorXd z;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  VectorXd x;
  VectorXd y;
  VectorXd z;
  double tau = 0.0;
  double kappa = 0.0;
};

class HsdeSolver {
 public:
  HsdeSolver(const ConicProgram& prog, const SolverOptions& opts)
      : prog_(prog), opts_(opts) {}

  ConicSolution Run();

 private:
  bool Presolve(ConicSolution* early);
  void Equilibrate();
  void InitialPoint();
  double Mu(const Iterate& it) const;
  bool Interior(const Iterate& it) const;
  double Proximity(const Iterate& it, double mu) const;
  bool CheckTermination(const Iterate& it, ConicSolution* sol) const;
  double Score(const ConicSolution& sol) const;
  bool CheckReducedAccuracy(const Iterate& it, ConicSolution* sol) const;
  bool MeetsTolerances(const ConicSolution& sol, double factor) const;
  bool FactorScaling(const Iterate& it, double mu);
  bool SolveNewton(const VectorXd& rx, const VectorXd& ry, double rtau,
                   const VectorXd& rz, double rkappa, const Iterate& it,
                   Direction* d) const;
  void FillPoint(const Iterate& it, ConicSolution* sol) const;

  const ConicProgram& prog_;
  const SolverOptions& opts_;

  // Reduced and scaled data.
  std::vector<int> rows_;
  SpMat A_;
  SpMat At_;
  VectorXd b_;
  VectorXd c_;
  VectorXd row_scale_;
  VectorXd col_scale_;
  std::vector<int> free_vars_;
  std::vector<int> lp_vars_;
  std::vector<int> exp_starts_;
  int nu_ = 0;

  std::unique_ptr<internal::KktSolver> kkt_;
  // Scaling blocks at the current iterate.
  VectorXd lp_w_;
  std::vector<Eigen::Matrix3d> exp_w_;
  VectorXd p2_;
  VectorXd q2_;

  Iterate it_;
};

bool HsdeSolver::Presolve(ConicSolution* early) {
  const int n = prog_.num_vars();
  const int m = prog_.num_rows();
  const SpMat& A = prog_.A;
  std::vector<int> row_nnz(m, 0);
  std::vector<int> col_nnz(n, 0);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      if (it.value() != 0.0) {
        ++row_nnz[it.row()];
        ++col_nnz[it.col()];
      }
    }
  }
  const double btol = opts_.feas_tol * (1.0 + prog_.b.lpNorm<Eigen::Infinity>());
  for (int r = 0; r < m; ++r) {
    if (row_nnz[r] > 0) {
      rows_.push_back(r);
      continue;
    }
    if (std::abs(prog_.b(r)) > btol) {
      early->status = SolveStatus::kPrimalInfeasible;
      early->z = VectorXd::Zero(n);
      early->y = VectorXd::Zero(m);
      early->y(r) = 1.0 / prog_.b(r);
      early->s = VectorXd::Zero(n);
      return false;
    }
  }
  for (const auto& blk : prog_.blocks) {
    for (int j = blk.start; j < blk.start + blk.size; ++j) {
      if (blk.kind == ConeKind::kFree && col_nnz[j] == 0 && prog_.c(j) != 0.0) {
        early->status = SolveStatus::kDualInfeasible;
        early->z = VectorXd::Zero(n);
        early->z(j) = -1.0 / prog_.c(j);
        early->y = VectorXd::Zero(m);
        early->s = VectorXd::Zero(n);
        return false;
      }
    }
    if (blk.kind == ConeKind::kFree) {
      for (int j = blk.start; j < blk.start + blk.size; ++j) free_vars_.push_back(j);
    } else if (blk.kind == ConeKind::kNonneg) {
      for (int j = blk.start; j < blk.start + blk.size; ++j) lp_vars_.push_back(j);
    } else {
      exp_starts_.push_back(blk.start);
    }
  }
  nu_ = static_cast<int>(lp_vars_.size() + 3 * exp_starts_.size());

  std::vector<int> new_row(m, -1);
  for (size_t i = 0; i < rows_.size(); ++i) new_row[rows_[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      if (it.value() != 0.0) trips.emplace_back(new_row[it.row()], it.col(), it.value());
    }
  }
  A_.resize(static_cast<int>(rows_.size()), n);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();
  b_.resize(rows_.size());
  for (size_t i = 0; i < rows_.size(); ++i) b_(i) = prog_.b(rows_[i]);
  c_ = prog_.c;
  return true;
}

void HsdeSolver::Equilibrate() {
  const int m = static_cast<int>(A_.rows());
  const int n = static_cast<int>(A_.cols());
  row_scale_ = VectorXd::Ones(m);
  col_scale_ = VectorXd::Ones(n);
  SpMat S = A_;
  for (int pass = 0; pass < 20; ++pass) {
    VectorXd rmax = VectorXd::Zero(m);
    VectorXd cmax = VectorXd::Zero(n);
    for (int k = 0; k < S.outerSize(); ++k) {
      for (SpMat::InnerIterator it(S, k); it; ++it) {
        const double a = std::abs(it.value());
        rmax(it.row()) = std::max(rmax(it.row()), a);
        cmax(it.col()) = std::max(cmax(it.col()), a);
      }
    }
    for (int st : exp_starts_) {
      const double v = cmax.segment<3>(st).maxCoeff();
      cmax.segment<3>(st).setConstant(v);
    }
    double spread = 0.0;
    VectorXd dr(m), dc(n);
    for (int i = 0; i < m; ++i) {
      dr(i) = rmax(i) > 0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
      spread = std::max(spread, std::abs(1.0 - rmax(i)));
    }
    for (int j = 0; j < n; ++j) {
      dc(j) = cmax(j) > 0 ? 1.0 / std::sqrt(cmax(j)) : 1.0;
      if (cmax(j) > 0) spread = std::max(spread, std::abs(1.0 - cmax(j)));
    }
    row_scale_ = (row_scale_.array() * dr.array()).cwiseMin(1e6).cwiseMax(1e-6);
    col_scale_ = (col_scale_.array() * dc.array()).cwiseMin(1e6).cwiseMax(1e-6);
    S = row_scale_.asDiagonal() * A_ * col_scale_.asDiagonal();
    if (spread < 1e-2) break;
  }
  A_ = S;
  A_.makeCompressed();
  At_ = A_.transpose();
  b_ = row_scale_.cwiseProduct(b_);
  c_ = col_scale_.cwiseProduct(c_);
}

void HsdeSolver::InitialPoint() {
  const int n = static_cast<int>(A_.cols());
  const int m = static_cast<int>(A_.rows());
  it_.x = VectorXd::Zero(n);
  it_.z = VectorXd::Zero(n);
  it_.y = VectorXd::Zero(m);
  for (int j : lp_vars_) {
    it_.x(j) = 1.0;
    it_.z(j) = 1.0;
  }
  const Eigen::Vector3d central = exp_cone::CentralPoint();
  for (int st : exp_starts_) {
    it_.x.segment<3>(st) = central;
    it_.z.segment<3>(st) = central;
  }
  if (opts_.warm_start && opts_.warm_start->size() == n) {
    for (int j : free_vars_) it_.x(j) = (*opts_.warm_start)(j) / col_scale_(j);
  }
  it_.tau = 1.0;
  it_.kappa = 1.0;
}

double HsdeSolver::Mu(const Iterate& it) const {
  double sz = it.tau * it.kappa;
  for (int j : lp_vars_) sz += it.x(j) * it.z(j);
  for (int st : exp_starts_) sz += it.x.segment<3>(st).dot(it.z.segment<3>(st));
  return sz / (nu_ + 1);
}

bool HsdeSolver::Interior(const Iterate& it) const {
  if (!(it.tau > 0.0) || !(it.kappa > 0.0)) return false;
  for (int j : lp_vars_) {
    if (!(it.x(j) > 0.0) || !(it.z(j) > 0.0)) return false;
  }
  for (int st : exp_starts_) {
    if (!exp_cone::InPrimalInterior(it.x.segment<3>(st))) return false;
    if (!exp_cone::InDualInterior(it.z.segment<3>(st))) return false;
  }
  return true;
}

double HsdeSolver::Proximity(const Iterate& it, double mu) const {
  double prox = std::abs(it.tau * it.kappa / mu - 1.0);
  for (int j : lp_vars_) prox = std::max(prox, std::abs(it.x(j) * it.z(j) / mu - 1.0));
  for (int st : exp_starts_) {
    const Eigen::Vector3d s = it.x.segment<3>(st);
    const Eigen::Vector3d psi = it.z.segment<3>(st) / mu + exp_cone::Gradient(s);
    const double q = psi.dot(exp_cone::InverseHessianProduct(s, psi));
    if (!(q >= 0.0)) return kInf;
    prox = std::max(prox, std::sqrt(q));
  }
  return prox;
}

void HsdeSolver::FillPoint(const Iterate& it, ConicSolution* sol) const {
  const int n = prog_.num_vars();
  const int m = prog_.num_rows();
  sol->z = col_scale_.cwiseProduct(it.x) / it.tau;
  sol->y = VectorXd::Zero(m);
  for (size_t i = 0; i < rows_.size(); ++i) {
    sol->y(rows_[i]) = -row_scale_(i) * it.y(i) / it.tau;
  }
  sol->s = it.z.cwiseQuotient(col_scale_) / it.tau;
  for (int j : free_vars_) sol->s(j) = 0.0;
  (void)n;
}

bool HsdeSolver::MeetsTolerances(const ConicSolution& sol, double factor) const {
  const double pobj = sol.primal_objective;
  const double dobj = sol.dual_objective;
  const double rel_gap =
      std::abs(pobj - dobj) / std::max(1.0, std::min(std::abs(pobj), std::abs(dobj)));
  return sol.primal_residual <= factor * opts_.feas_tol &&
         sol.dual_residual <= factor * opts_.feas_tol && rel_gap <= factor * opts_.gap_tol;
}

double HsdeSolver::Score(const ConicSolution& sol) const {
  const double rel_gap = std::abs(sol.primal_objective - sol.dual_objective) /
                         std::max(1.0, std::min(std::abs(sol.primal_objective),
                                                std::abs(sol.dual_objective)));
  return std::max({sol.primal_residual / opts_.feas_tol, sol.dual_residual / opts_.feas_tol,
                   rel_gap / opts_.gap_tol});
}

bool HsdeSolver::CheckReducedAccuracy(const Iterate& it, ConicSolution* sol) const {
  if (!(it.tau > 0.0)) return false;
  if (CheckTermination(it, sol)) return sol->optimal();
  if (MeetsTolerances(*sol, opts_.reduced_accuracy_factor)) {
    sol->status = SolveStatus::kAlmostOptimal;
    return true;
  }
  return false;
}

bool HsdeSolver::CheckTermination(const Iterate& it, ConicSolution* sol) const {
  const VectorXd& b = prog_.b;
  const VectorXd& c = prog_.c;
  const SpMat& A = prog_.A;

  FillPoint(it, sol);
  const VectorXd pres = A * sol->z - b;
  const VectorXd dres = c - A.transpose() * sol->y - sol->s;
  sol->primal_residual = pres.lpNorm<Eigen::Infinity>() / (1.0 + b.lpNorm<Eigen::Infinity>());
  VectorXd dres_full = dres;
  sol->dual_residual = dres_full.lpNorm<Eigen::Infinity>() / (1.0 + c.lpNorm<Eigen::Infinity>());
  const double pobj = c.dot(sol->z);
  const double dobj = b.dot(sol->y);
  sol->primal_objective = pobj + prog_.objective_offset;
  sol->dual_objective = dobj + prog_.objective_offset;
  sol->gap = pobj - dobj;
  if (MeetsTolerances(*sol, 1.0)) {
    sol->status = SolveStatus::kOptimal;
    return true;
  }

  // Primal infeasibility: b'y > 0 with −A'y ∈ K*.
  VectorXd y_ray = VectorXd::Zero(prog_.num_rows());
  for (size_t i = 0; i < rows_.size(); ++i) y_ray(rows_[i]) = -row_scale_(i) * it.y(i);
  VectorXd s_ray = it.z.cwiseQuotient(col_scale_);
  for (int j : free_vars_) s_ray(j) = 0.0;
  const double by = b.dot(y_ray);
  if (by > 0.0) {
    const double res = (A.transpose() * y_ray + s_ray).lpNorm<Eigen::Infinity>();
    if (res <= opts_.infeas_tol * by) {
      sol->status = SolveStatus::kPrimalInfeasible;
      sol->y = y_ray / by;
      sol->s = s_ray / by;
      sol->z = VectorXd::Zero(prog_.num_vars());
      return true;
    }
  }
  // Dual infeasibility: c'x < 0 with Ax = 0, x ∈ K.
  const VectorXd x_ray = col_scale_.cwiseProduct(it.x);
  const double cx = c.dot(x_ray);
  if (cx < 0.0) {
    const double res = (A * x_ray).lpNorm<Eigen::Infinity>();
    if (res <= opts_.infeas_tol * -cx) {
      sol->status = SolveStatus::kDualInfeasible;
      sol->z = x_ray / -cx;
      sol->y = VectorXd::Zero(prog_.num_rows());
      sol->s = VectorXd::Zero(prog_.num_vars());
      return true;
    }
  }
  return false;
}

bool HsdeSolver::FactorScaling(const Iterate& it, double mu) {
  lp_w_.resize(lp_vars_.size());
  for (size_t k = 0; k < lp_vars_.size(); ++k) {
    const int j = lp_vars_[k];
    lp_w_(k) = it.z(j) / it.x(j);
  }
  exp_w_.resize(exp_starts_.size());
  for (size_t k = 0; k < exp_starts_.size(); ++k) {
    exp_w_[k] = mu * exp_cone::Hessian(it.x.segment<3>(exp_starts_[k]));
  }
  if (!kkt_->Factor(lp_w_, exp_w_)) return false;

  const int n = static_cast<int>(A_.cols());
  const int m = static_cast<int>(A_.rows());
  VectorXd rhs(n + m);
  rhs.head(n) = -c_;
  rhs.tail(m) = b_;
  VectorXd sol;
  const double res = kkt_->Solve(rhs, &sol);
  if (!std::isfinite(res) || !sol.allFinite()) return false;
  p2_ = sol.head(n);
  q2_ = sol.tail(m);
  return true;
}

bool HsdeSolver::SolveNewton(const VectorXd& rx, const VectorXd& ry, double rtau,
                             const VectorXd& rz, double rkappa, const Iterate& it,
                             Direction* d) const {
  const int n = static_cast<int>(A_.cols());
  const int m = static_cast<int>(A_.rows());
  VectorXd rhs(n + m);
  rhs.head(n) = rx + rz;
  rhs.tail(m) = -ry;
  VectorXd sol;
  const double res = kkt_->Solve(rhs, &sol);
  if (!std::isfinite(res) || !sol.allFinite()) return false;
  const VectorXd p1 = sol.head(n);
  const VectorXd q1 = sol.tail(m);

  const double denom = it.kappa / it.tau - c_.dot(p2_) - b_.dot(q2_);
  if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) return false;
  d->tau = (rtau + rkappa + c_.dot(p1) + b_.dot(q1)) / denom;
  d->x = p1 + d->tau * p2_;
  d->y = q1 + d->tau * q2_;
  d->z = rz;
  for (size_t k = 0; k < lp_vars_.size(); ++k) {
    const int j = lp_vars_[k];
    d->z(j) -= lp_w_(k) * d->x(j);
  }
  for (size_t k = 0; k < exp_starts_.size(); ++k) {
    const int st = exp_starts_[k];
    d->z.segment<3>(st) -= exp_w_[k] * d->x.segment<3>(st);
  }
  for (int j : free_vars_) d->z(j) = 0.0;
  d->kappa = rkappa - (it.kappa / it.tau) * d->tau;
  return d->x.allFinite() && d->y.allFinite() && std::isfinite(d->tau);
}

ConicSolution HsdeSolver::Run() {
  ConicSolution sol;
  prog_.Validate();
  if (!Presolve(&sol)) return sol;
  Equilibrate();
  kkt_ = std::make_unique<internal::KktSolver>(A_, lp_vars_, exp_starts_);
  InitialPoint();

  const int n = static_cast<int>(A_.cols());
  Iterate& it = it_;
  int stalls = 0;
  std::optional<ConicSolution> accepted;
  std::optional<ConicSolution> best;
  double best_score = std::numeric_limits<double>::infinity();
  int polish = 0;
  for (int iter = 0;; ++iter) {
    sol.iterations = iter;
    if (CheckTermination(it, &sol)) {
      if (sol.status != SolveStatus::kOptimal || MeetsTolerances(sol, kPolishFactor)) {
        return sol;
      }
      accepted = sol;
    }
    if (it.tau > 0.0) {
      const double score = Score(sol);
      if (score < best_score) {
        best_score = score;
        best = sol;
      }
    }
    if (accepted && ++polish > kPolishIters) return *accepted;
    if (iter >= opts_.max_iters) {
      if (accepted) return *accepted;
      if (CheckReducedAccuracy(it, &sol)) return sol;
      if (best && MeetsTolerances(*best, opts_.reduced_accuracy_factor)) {
        best->status = SolveStatus::kAlmostOptimal;
        return *best;
      }
      sol.status = SolveStatus::kMaxIterations;
      return sol;
    }
    const double mu = Mu(it);
    if (!(mu > 0.0) || !std::isfinite(mu)) break;

    const VectorXd rx = At_ * it.y - it.z + c_ * it.tau;
    const VectorXd ry = -(A_ * it.x) + b_ * it.tau;
    const double rtau = -c_.dot(it.x) - b_.dot(it.y) - it.kappa;

    if (opts_.verbose) {
      std::fprintf(stderr,
                   "%3d mu=%.3e tau=%.3e kappa=%.3e pres=%.3e dres=%.3e pobj=%.9e dobj=%.9e\n",
                   iter, mu, it.tau, it.kappa, sol.primal_residual, sol.dual_residual,
                   sol.primal_objective, sol.dual_objective);
    }

    if (!FactorScaling(it, mu)) break;

    Direction pred, cent;
    VectorXd rz_pred = -it.z;
    for (int j : free_vars_) rz_pred(j) = 0.0;
    if (!SolveNewton(-rx, -ry, -rtau, rz_pred, -it.kappa, it, &pred)) break;

    VectorXd rz_cent = -it.z;
    for (int j : lp_vars_) rz_cent(j) += mu / it.x(j);
    for (int st : exp_starts_) {
      rz_cent.segment<3>(st) -= mu * exp_cone::Gradient(it.x.segment<3>(st));
    }
    for (int j : free_vars_) rz_cent(j) = 0.0;
    const VectorXd zero_n = VectorXd::Zero(n);
    const VectorXd zero_m = VectorXd::Zero(A_.rows());
    if (!SolveNewton(zero_n, zero_m, 0.0, rz_cent, mu / it.tau - it.kappa, it, &cent)) {
      break;
    }

    // Second-order term of the predictor along the central path.
    Direction adj;
    VectorXd rz_adj = VectorXd::Zero(n);
    for (int j : lp_vars_) rz_adj(j) = -2.0 * pred.x(j) * pred.z(j) / it.x(j);
    for (size_t k = 0; k < exp_starts_.size(); ++k) {
      const int st = exp_starts_[k];
      const Eigen::Vector3d s = it.x.segment<3>(st);
      const Eigen::Vector3d ds = pred.x.segment<3>(st);
      rz_adj.segment<3>(st) = 2.0 * exp_w_[k] * ds - mu * exp_cone::ThirdOrder(s, ds);
    }
    const double rkappa_adj = -2.0 * pred.tau * pred.kappa / it.tau;
    const bool have_adj = SolveNewton(zero_n, zero_m, 0.0, rz_adj, rkappa_adj, it, &adj);

    bool moved = false;
    Iterate trial;
    for (int pass = have_adj ? 0 : 1; pass < 2 && !moved; ++pass) {
      for (double alpha : kStepSchedule) {
        const double beta = 1.0 - alpha;
        trial.x = it.x + alpha * pred.x + beta * cent.x;
        trial.y = it.y + alpha * pred.y + beta * cent.y;
        trial.z = it.z + alpha * pred.z + beta * cent.z;
        trial.tau = it.tau + alpha * pred.tau + beta * cent.tau;
        trial.kappa = it.kappa + alpha * pred.kappa + beta * cent.kappa;
        if (pass == 0) {
          const double gamma = 0.5 * alpha * alpha;
          trial.x += gamma * adj.x;
          trial.y += gamma * adj.y;
          trial.z += gamma * adj.z;
          trial.tau += gamma * adj.tau;
          trial.kappa += gamma * adj.kappa;
        }
        if (!Interior(trial)) continue;
        const double new_mu = Mu(trial);
        if (!(new_mu > 0.0)) continue;
        if (Proximity(trial, new_mu) <= kMaxNeighborhood) {
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      // Backtrack along the pure centering direction.
      for (double frac = 0.5; frac > 1e-6; frac *= 0.5) {
        trial.x = it.x + frac * cent.x;
        trial.y = it.y + frac * cent.y;
        trial.z = it.z + frac * cent.z;
        trial.tau = it.tau + frac * cent.tau;
        trial.kappa = it.kappa + frac * cent.kappa;
        if (Interior(trial) && Mu(trial) > 0.0) {
          moved = true;
          break;
        }
      }
      if (!moved || ++stalls > 8) break;
    } else {
      stalls = 0;
    }
    it = std::move(trial);
  }
  if (accepted) return *accepted;
  if (CheckReducedAccuracy(it, &sol)) return sol;
  if (best && MeetsTolerances(*best, opts_.reduced_accuracy_factor)) {
    best->status = SolveStatus::kAlmostOptimal;
    return *best;
  }
  sol.status = SolveStatus::kNumericalFailure;
  return sol;
}

}  // namespace

ConicSolution Solve(const ConicProgram& program, const SolverOptions& options) {
  HsdeSolver solver(program, options);
  return solver.Run();
}

}  // namespace sagerel::conic
