#include "sagerel/sage.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sagerel/exponent_index.h"

namespace sagerel {

using conic::ExpVar;
using conic::LinearExpr;
using conic::ProgramBuilder;

namespace {

constexpr double kE = std::numbers::e;

// Rows spanning the row space of g (n×s), orthonormalized.
Eigen::MatrixXd IndependentRows(const Eigen::MatrixXd& g) {
  if (g.rows() == 0 || g.cols() == 0) return Eigen::MatrixXd(0, g.cols());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
  qr.setThreshold(1e-11);
  const int rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd r = qr.matrixR().topRows(rank).triangularView<Eigen::Upper>();
  Eigen::MatrixXd rows = r * qr.colsPermutation().transpose();
  for (int i = 0; i < rank; ++i) {
    const double nrm = rows.row(i).lpNorm<Eigen::Infinity>();
    if (nrm > 0) rows.row(i) /= nrm;
  }
  return rows;
}

void AddBalanceRows(ProgramBuilder* b, const Eigen::MatrixXd& diffs,
                    const std::vector<int>& nu_vars) {
  const Eigen::MatrixXd rows = IndependentRows(diffs);
  for (int r = 0; r < rows.rows(); ++r) {
    LinearExpr row;
    for (int j = 0; j < rows.cols(); ++j) {
      if (rows(r, j) != 0.0) row.AddTerm(nu_vars[j], rows(r, j));
    }
    b->AddEquality(row);
  }
}

double ClampedRelativeEntropy(const Eigen::VectorXd& nu, const Eigen::VectorXd& lambda,
                              int skip) {
  double total = 0.0;
  for (int j = 0; j < nu.size(); ++j) {
    if (j == skip) continue;
    const double v = std::max(nu(j), 0.0);
    const double l = std::max(lambda(j), 0.0);
    if (v == 0.0) continue;
    if (l == 0.0) return std::numeric_limits<double>::infinity();
    total += v * std::log(v / l);
  }
  return total;
}

}  // namespace

AgeResult AgeCertify(const Eigen::Ref<const Eigen::VectorXd>& c, double beta,
                     const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                     const Eigen::Ref<const Eigen::VectorXd>& designated,
                     const conic::SolverOptions& options) {
  const int ell = static_cast<int>(c.size());
  if (exponents.rows() != ell || exponents.cols() != designated.size()) {
    throw std::invalid_argument("AgeCertify: dimension mismatch");
  }
  if ((c.array() < 0.0).any()) {
    throw std::invalid_argument("AgeCertify: coefficients must be nonnegative");
  }
  std::vector<int> kept;
  for (int j = 0; j < ell; ++j) {
    if (c(j) > 0.0) kept.push_back(j);
  }
  ProgramBuilder b;
  const conic::RelEntBlock re =
      conic::AddRelativeEntropy(&b, static_cast<int>(kept.size()), beta);
  std::vector<int> nu_vars;
  Eigen::MatrixXd diffs(designated.size(), kept.size());
  for (size_t k = 0; k < kept.size(); ++k) {
    b.AddEquality(LinearExpr::Var(re.lambda(k)), kE * c(kept[k]));
    nu_vars.push_back(re.nu(k));
    diffs.col(k) = exponents.row(kept[k]).transpose() - designated;
  }
  AddBalanceRows(&b, diffs, nu_vars);

  AgeResult out;
  const conic::ConicSolution sol = conic::Solve(b.Build(), options);
  out.status = sol.status;
  if (sol.status == conic::SolveStatus::kPrimalInfeasible) {
    out.verdict = AgeVerdict::kInfeasible;
  } else if (sol.optimal()) {
    out.verdict = AgeVerdict::kFeasible;
    AgeCertificate cert;
    cert.nu = Eigen::VectorXd::Zero(ell);
    for (size_t k = 0; k < kept.size(); ++k) {
      cert.nu(kept[k]) = std::max(sol.z(re.nu(k)), 0.0);
    }
    cert.slack = ClampedRelativeEntropy(cert.nu, kE * c, -1) - beta;
    out.certificate = std::move(cert);
  }
  return out;
}

std::optional<AgeVerdict> AgeFastPath(const Eigen::Ref<const Eigen::VectorXd>& designated,
                                      const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                                      double beta) {
  if (exponents.cols() != designated.size()) {
    throw std::invalid_argument("AgeFastPath: dimension mismatch");
  }
  Eigen::MatrixXd pts(exponents.rows() + 1, exponents.cols());
  pts << exponents, designated.transpose();
  if (!SeparateVertex(pts, static_cast<int>(exponents.rows()))) return std::nullopt;
  return beta >= 0.0 ? AgeVerdict::kFeasible : AgeVerdict::kInfeasible;
}

Eigen::VectorXd SageCertificate::Total() const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(size());
  for (const auto& p : parts) total += p;
  return total;
}

bool VerifyCertificate(const SageCertificate& cert, const Signomial& f, double tol) {
  const int ell = cert.size();
  if (cert.exponents.cols() != f.num_vars() || static_cast<int>(cert.parts.size()) != ell ||
      static_cast<int>(cert.nus.size()) != ell) {
    return false;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ell);
  for (int t = 0; t < f.num_terms(); ++t) {
    bool found = false;
    for (int k = 0; k < ell && !found; ++k) {
      if (SameExponent(cert.exponents.row(k).transpose(), f.exponent(t))) {
        c(k) += f.coeff(t);
        found = true;
      }
    }
    if (!found) return false;
  }
  const double cscale = 1.0 + c.lpNorm<Eigen::Infinity>();
  if ((cert.Total() - c).lpNorm<Eigen::Infinity>() > tol * cscale) return false;

  for (int i = 0; i < ell; ++i) {
    const Eigen::VectorXd& part = cert.parts[i];
    const Eigen::VectorXd& nu = cert.nus[i];
    if (part.size() != ell || nu.size() != ell) return false;
    if (!part.allFinite() || !nu.allFinite()) return false;
    const double nscale = 1.0 + nu.lpNorm<Eigen::Infinity>();
    for (int j = 0; j < ell; ++j) {
      if (j == i) continue;
      if (part(j) < -tol || nu(j) < -tol) return false;
    }
    if (std::abs(nu.sum()) > tol * nscale) return false;
    const Eigen::VectorXd moment = cert.exponents.transpose() * nu;
    const double ascale = 1.0 + cert.exponents.lpNorm<Eigen::Infinity>();
    if (moment.lpNorm<Eigen::Infinity>() > tol * nscale * ascale) return false;
    const double d = ClampedRelativeEntropy(nu, kE * part, i);
    if (!(d <= part(i) + tol * std::max(1.0, part.lpNorm<Eigen::Infinity>()))) {
      return false;
    }
  }
  return true;
}

SageConstraint AddSageConstraint(ProgramBuilder* builder,
                                 const Eigen::Ref<const Eigen::MatrixXd>& support,
                                 std::span<const LinearExpr> coeffs) {
  const int ell = static_cast<int>(support.rows());
  if (static_cast<int>(coeffs.size()) != ell) {
    throw std::invalid_argument("AddSageConstraint: one coefficient per support term");
  }
  SageConstraint out;
  out.support = support;
  out.active.assign(ell, false);
  out.coeff_rows.assign(ell, -1);
  out.residuals.assign(ell, -1);

  std::vector<LinearExpr> compact;
  double scale = 0.0;
  for (const auto& e : coeffs) {
    compact.push_back(e.Compacted());
    scale = std::max(scale, std::abs(e.constant()));
  }
  std::vector<int> active;
  for (int k = 0; k < ell; ++k) {
    const bool zero = compact[k].terms().empty() &&
                      std::abs(compact[k].constant()) <= 1e-12 * std::max(scale, 1.0);
    if (!zero) {
      out.active[k] = true;
      active.push_back(k);
    }
  }
  if (active.empty()) return out;

  Eigen::MatrixXd pts(active.size(), support.cols());
  for (size_t a = 0; a < active.size(); ++a) pts.row(a) = support.row(active[a]);
  std::vector<bool> extremal(ell, false);
  for (int a : ExtremePoints(pts)) extremal[active[a]] = true;

  std::vector<std::vector<int>> slot(ell);  // slot[i][k]: position of k in block i
  std::vector<int> block_of(ell, -1);
  for (int i : active) {
    if (extremal[i]) continue;
    SageConstraint::Block blk;
    blk.index = i;
    std::vector<int> nu_vars;
    Eigen::MatrixXd diffs(support.cols(), active.size() - 1);
    slot[i].assign(ell, -1);
    for (int k : active) {
      if (k == i) continue;
      const ExpVar cone = builder->AddExp();
      slot[i][k] = static_cast<int>(blk.others.size());
      diffs.col(blk.others.size()) = (support.row(k) - support.row(i)).transpose();
      blk.others.push_back(k);
      blk.cones.push_back(cone);
      nu_vars.push_back(cone.y);
    }
    AddBalanceRows(builder, diffs, nu_vars);
    block_of[i] = static_cast<int>(out.blocks.size());
    out.blocks.push_back(std::move(blk));
  }

  for (int k : active) {
    LinearExpr row;
    for (const auto& blk : out.blocks) {
      const int pos = slot[blk.index][k];
      if (pos >= 0) row.AddTerm(blk.cones[pos].z, 1.0 / kE);
    }
    if (block_of[k] >= 0) {
      for (const auto& cone : out.blocks[block_of[k]].cones) row.AddTerm(cone.x, -1.0);
    }
    out.residuals[k] = builder->AddNonneg();
    row.AddTerm(out.residuals[k], 1.0);
    out.coeff_rows[k] = builder->AddEquality(row, compact[k]);
  }
  return out;
}

SageCertificate SageConstraint::Certificate(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  const int ell = static_cast<int>(support.rows());
  SageCertificate cert;
  cert.exponents = support;
  cert.parts.assign(ell, Eigen::VectorXd::Zero(ell));
  cert.nus.assign(ell, Eigen::VectorXd::Zero(ell));
  for (const auto& blk : blocks) {
    Eigen::VectorXd& part = cert.parts[blk.index];
    Eigen::VectorXd& nu = cert.nus[blk.index];
    for (size_t j = 0; j < blk.others.size(); ++j) {
      const int k = blk.others[j];
      part(k) = z(blk.cones[j].z) / kE;
      nu(k) = z(blk.cones[j].y);
      part(blk.index) -= z(blk.cones[j].x);
    }
    nu(blk.index) = -nu.sum();
  }
  for (int k = 0; k < ell; ++k) {
    if (residuals[k] >= 0) cert.parts[k](k) += z(residuals[k]);
  }
  return cert;
}

SageResult SageCertify(const Signomial& f, const conic::SolverOptions& options) {
  return SageCertify(f, f.exponents(), options);
}

SageResult SageCertify(const Signomial& f, const Eigen::Ref<const Eigen::MatrixXd>& support,
                       const conic::SolverOptions& options) {
  if (support.cols() != f.num_vars()) {
    throw std::invalid_argument("SageCertify: support dimension mismatch");
  }
  const int ell = static_cast<int>(support.rows());
  ExponentIndex index(f.num_vars());
  for (int k = 0; k < ell; ++k) index.Insert(support.row(k).transpose());
  if (index.size() != ell) {
    throw std::invalid_argument("SageCertify: support has duplicate exponents");
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ell);
  for (int t = 0; t < f.num_terms(); ++t) {
    const auto k = index.Find(f.exponent(t));
    if (!k) throw std::invalid_argument("SageCertify: support misses an exponent of f");
    c(*k) += f.coeff(t);
  }

  SageResult out;
  if ((c.array() >= 0.0).all()) {
    SageCertificate cert;
    cert.exponents = support;
    cert.parts.assign(ell, Eigen::VectorXd::Zero(ell));
    cert.nus.assign(ell, Eigen::VectorXd::Zero(ell));
    for (int k = 0; k < ell; ++k) cert.parts[k](k) = c(k);
    out.verdict = SageVerdict::kSage;
    out.certificate = std::move(cert);
    out.status = conic::SolveStatus::kOptimal;
    return out;
  }

  ProgramBuilder b;
  std::vector<LinearExpr> coeffs(c.data(), c.data() + ell);
  const SageConstraint sc = AddSageConstraint(&b, support, coeffs);
  const conic::ConicSolution sol = conic::Solve(b.Build(), options);
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.optimal()) {
    SageCertificate cert = sc.Certificate(sol.z);
    if (VerifyCertificate(cert, f, 1e-6)) {
      out.verdict = SageVerdict::kSage;
      out.certificate = std::move(cert);
    }
  } else if (sol.status == conic::SolveStatus::kPrimalInfeasible) {
    out.verdict = SageVerdict::kNotSage;
    out.dual_ray = Eigen::VectorXd::Zero(ell);
    for (int k = 0; k < ell; ++k) {
      if (sc.coeff_rows[k] >= 0) out.dual_ray(k) = -sol.y(sc.coeff_rows[k]);
    }
  }
  return out;
}

std::optional<double> SageMargin(const Signomial& f, const conic::SolverOptions& options) {
  ProgramBuilder b;
  const int t = b.AddFree();
  std::vector<LinearExpr> coeffs;
  for (int k = 0; k < f.num_terms(); ++k) {
    LinearExpr e(f.coeff(k));
    e.AddTerm(t, -1.0);
    coeffs.push_back(e);
  }
  AddSageConstraint(&b, f.exponents(), coeffs);
  b.AddObjective(LinearExpr::Var(t, -1.0));
  const conic::ConicSolution sol = conic::Solve(b.Build(), options);
  if (!sol.optimal()) return std::nullopt;
  return sol.z(t);
}

DualMembership CheckDualMembership(const Eigen::Ref<const Eigen::VectorXd>& v,
                                   const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                                   const conic::SolverOptions& options) {
  const int ell = static_cast<int>(v.size());
  const int n = static_cast<int>(exponents.cols());
  if (exponents.rows() != ell) {
    throw std::invalid_argument("CheckDualMembership: dimension mismatch");
  }
  DualMembership out;
  if ((v.array() < 0.0).any() || !v.allFinite()) {
    out.verdict = DualVerdict::kOutside;
    return out;
  }
  DualConeWitness w;
  w.v = v;
  w.taus.assign(ell, Eigen::VectorXd::Zero(n));
  for (int i = 0; i < ell; ++i) {
    if (v(i) == 0.0) continue;
    for (int j = 0; j < ell; ++j) {
      if (j != i && v(j) == 0.0) {
        out.verdict = DualVerdict::kOutside;
        return out;
      }
    }
    // (α_i − α_j)·τ − s_j = v_i log(v_i/v_j) − relax,  s_j ≥ 0.
    ProgramBuilder b;
    std::vector<int> tau(n);
    for (int k = 0; k < n; ++k) tau[k] = b.AddFree();
    for (int j = 0; j < ell; ++j) {
      if (j == i) continue;
      const double rhs = v(i) * std::log(v(i) / v(j));
      LinearExpr row;
      for (int k = 0; k < n; ++k) {
        const double a = exponents(i, k) - exponents(j, k);
        if (a != 0.0) row.AddTerm(tau[k], a);
      }
      row.AddTerm(b.AddNonneg(), -1.0);
      b.AddEquality(row, rhs - 1e-8 * (1.0 + std::abs(rhs)));
    }
    const conic::ConicSolution sol = conic::Solve(b.Build(), options);
    if (sol.status == conic::SolveStatus::kPrimalInfeasible) {
      out.verdict = DualVerdict::kOutside;
      return out;
    }
    if (!sol.optimal()) {
      out.verdict = DualVerdict::kIndeterminate;
      return out;
    }
    for (int k = 0; k < n; ++k) w.taus[i](k) = sol.z(tau[k]);
  }
  out.verdict = DualVerdict::kInside;
  out.witness = std::move(w);
  return out;
}

double DualWitnessViolation(const DualConeWitness& w,
                            const Eigen::Ref<const Eigen::MatrixXd>& exponents) {
  const int ell = static_cast<int>(w.v.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ell; ++i) {
    for (int j = 0; j < ell; ++j) {
      if (i == j) continue;
      const double vi = w.v(i), vj = w.v(j);
      double lhs;
      if (vi == 0.0) {
        lhs = 0.0;
      } else if (vj == 0.0) {
        lhs = std::numeric_limits<double>::infinity();
      } else {
        lhs = vi * std::log(vi / vj);
      }
      const double rhs = (exponents.row(i) - exponents.row(j)).dot(w.taus[i]);
      worst = std::max(worst, lhs - rhs);
    }
  }
  return worst;
}

}  // namespace sagerel
