#include "sagerel/signomial.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sagerel/conic/program.h"
#include "sagerel/conic/solver.h"
#include "sagerel/exponent_index.h"

namespace sagerel {

namespace {

void RequireSameDim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// Accumulates terms keyed by exponent, first occurrence fixes the position.
class TermAccumulator {
 public:
  TermAccumulator(int n, std::size_t limit) : index_(n), limit_(limit) {}

  void Add(const Eigen::Ref<const Eigen::VectorXd>& alpha, double c) {
    auto [idx, inserted] = index_.Insert(alpha);
    if (inserted) {
      if (static_cast<std::size_t>(index_.size()) > limit_) {
        throw CapacityError("signomial exceeds the term limit of " +
                            std::to_string(limit_));
      }
      coeffs_.push_back(c);
    } else {
      coeffs_[idx] += c;
    }
  }

  Signomial Finish() const {
    return Signomial(index_.ToMatrix(),
                     Eigen::Map<const Eigen::VectorXd>(coeffs_.data(), coeffs_.size()));
  }

 private:
  ExponentIndex index_;
  std::vector<double> coeffs_;
  std::size_t limit_;
};

}  // namespace

Signomial::Signomial(const Eigen::Ref<const Eigen::MatrixXd>& exponents,
                     const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  if (exponents.rows() != coeffs.size()) {
    throw std::invalid_argument("Signomial: exponent and coefficient counts differ");
  }
  if (exponents.rows() < 1) {
    throw std::invalid_argument("Signomial: at least one term is required");
  }
  if (!exponents.allFinite() || !coeffs.allFinite()) {
    throw std::invalid_argument("Signomial: non-finite data");
  }
  const int n = static_cast<int>(exponents.cols());
  ExponentIndex index(n);
  std::vector<double> merged;
  for (int j = 0; j < exponents.rows(); ++j) {
    auto [idx, inserted] = index.Insert(exponents.row(j).transpose());
    if (inserted) {
      merged.push_back(coeffs(j));
    } else {
      merged[idx] += coeffs(j);
    }
  }
  exponents_ = index.ToMatrix();
  coeffs_ = Eigen::Map<const Eigen::VectorXd>(merged.data(), merged.size());
}

Signomial Signomial::Constant(int n, double value) {
  return Signomial(Eigen::MatrixXd::Zero(1, n), Eigen::VectorXd::Constant(1, value));
}

Signomial Signomial::Monomial(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                              double c) {
  return Signomial(alpha.transpose(), Eigen::VectorXd::Constant(1, c));
}

std::optional<int> Signomial::FindExponent(
    const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  if (alpha.size() != num_vars()) return std::nullopt;
  for (int j = 0; j < num_terms(); ++j) {
    if (SameExponent(exponents_.row(j).transpose(), alpha)) return j;
  }
  return std::nullopt;
}

double Signomial::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  RequireSameDim(static_cast<int>(x.size()), num_vars(), "Signomial::Evaluate");
  const Eigen::VectorXd powers = exponents_ * x;
  const double top = powers.maxCoeff();
  const double shift = top > 700.0 ? top : 0.0;
  double sum = 0.0;
  double comp = 0.0;
  for (int j = 0; j < num_terms(); ++j) {
    const double term = coeffs_(j) * std::exp(powers(j) - shift);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  const double total = sum + comp;
  if (shift == 0.0 || total == 0.0) return total;
  return total * std::exp(shift);
}

Signomial Signomial::TransformExponents(
    const Eigen::Ref<const Eigen::MatrixXd>& m) const {
  if (m.rows() != num_vars() || m.cols() != num_vars()) {
    throw std::invalid_argument("TransformExponents: matrix must be n×n");
  }
  return Signomial(exponents_ * m.transpose(), coeffs_);
}

Signomial Signomial::operator-() const { return -1.0 * *this; }

Signomial operator+(const Signomial& f, const Signomial& g) {
  RequireSameDim(f.num_vars(), g.num_vars(), "Signomial::operator+");
  Eigen::MatrixXd e(f.num_terms() + g.num_terms(), f.num_vars());
  e << f.exponents_, g.exponents_;
  Eigen::VectorXd c(f.num_terms() + g.num_terms());
  c << f.coeffs_, g.coeffs_;
  return Signomial(e, c);
}

Signomial operator-(const Signomial& f, const Signomial& g) { return f + (-g); }

Signomial operator*(double s, const Signomial& f) {
  Signomial out = f;
  out.coeffs_ *= s;
  return out;
}

bool Signomial::operator==(const Signomial& other) const {
  return exponents_.rows() == other.exponents_.rows() &&
         exponents_.cols() == other.exponents_.cols() &&
         exponents_ == other.exponents_ && coeffs_ == other.coeffs_;
}

bool SameTerms(const Signomial& f, const Signomial& g, double tol) {
  if (f.num_vars() != g.num_vars() || f.num_terms() != g.num_terms()) return false;
  std::vector<bool> used(g.num_terms(), false);
  for (int i = 0; i < f.num_terms(); ++i) {
    bool matched = false;
    for (int j = 0; j < g.num_terms(); ++j) {
      if (used[j] || !SameExponent(f.exponents().row(i).transpose(),
                                   g.exponents().row(j).transpose())) {
        continue;
      }
      const double a = f.coeff(i), b = g.coeff(j);
      if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)})) return false;
      used[j] = true;
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  return true;
}

Signomial Multiply(const Signomial& f, const Signomial& g, std::size_t term_limit) {
  RequireSameDim(f.num_vars(), g.num_vars(), "Multiply");
  TermAccumulator acc(f.num_vars(), term_limit);
  for (int i = 0; i < f.num_terms(); ++i) {
    for (int j = 0; j < g.num_terms(); ++j) {
      acc.Add(f.exponents().row(i).transpose() + g.exponents().row(j).transpose(),
              f.coeff(i) * g.coeff(j));
    }
  }
  return acc.Finish();
}

Signomial MultiplierExpand(const Signomial& f, int p, std::size_t term_limit) {
  const int n = f.num_vars();
  ExponentIndex base(n);
  base.Insert(Eigen::VectorXd::Zero(n));
  for (int j = 0; j < f.num_terms(); ++j) base.Insert(f.exponent(j));
  return MultiplierExpand(f, base.ToMatrix(), p, term_limit);
}

Signomial MultiplierExpand(const Signomial& f,
                           const Eigen::Ref<const Eigen::MatrixXd>& base, int p,
                           std::size_t term_limit) {
  if (p < 0) throw std::invalid_argument("MultiplierExpand: p must be nonnegative");
  RequireSameDim(static_cast<int>(base.cols()), f.num_vars(), "MultiplierExpand");
  if (p == 0) return f;
  const Signomial multiplier(base, Eigen::VectorXd::Ones(base.rows()));
  Signomial out = f;
  for (int k = 0; k < p; ++k) out = Multiply(multiplier, out, term_limit);
  return out;
}

ExponentSet MakeExponentSet(const Eigen::Ref<const Eigen::MatrixXd>& base, int p,
                            std::size_t limit) {
  if (p < 0) throw std::invalid_argument("MakeExponentSet: p must be nonnegative");
  if (base.rows() < 1) throw std::invalid_argument("MakeExponentSet: empty base");
  const int ell = static_cast<int>(base.rows());
  const int n = static_cast<int>(base.cols());
  ExponentSet out;
  out.base = base;
  out.order = p;
  ExponentIndex index(n);

  // Lexicographic walk over λ ∈ Z₊^ℓ with Σλ ≤ p.
  std::vector<int> lambda(ell, 0);
  Eigen::VectorXd point = Eigen::VectorXd::Zero(n);
  int total = 0;
  std::size_t visited = 0;
  const std::size_t visit_limit = 64 * limit + 1024;
  while (true) {
    if (++visited > visit_limit) {
      throw CapacityError("exponent set enumeration exceeds its budget");
    }
    auto [idx, inserted] = index.Insert(point);
    if (inserted) {
      if (static_cast<std::size_t>(index.size()) > limit) {
        throw CapacityError("exponent set exceeds the limit of " + std::to_string(limit));
      }
      out.generators.emplace_back();
    }
    out.generators[idx].push_back(lambda);

    // Advance to the lexicographic successor.
    int k = ell - 1;
    if (total < p) {
      ++lambda[k];
      ++total;
      point += base.row(k).transpose();
      continue;
    }
    while (k >= 0 && lambda[k] == 0) --k;
    if (k <= 0) break;
    total -= lambda[k] - 1;
    lambda[k] = 0;
    ++lambda[k - 1];
    point.setZero();
    for (int i = 0; i < ell; ++i) {
      if (lambda[i] != 0) point += lambda[i] * base.row(i).transpose();
    }
  }
  out.elements = index.ToMatrix();
  return out;
}

std::optional<Separation> SeparateVertex(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                         int j) {
  const int ell = static_cast<int>(points.rows());
  const int n = static_cast<int>(points.cols());
  if (j < 0 || j >= ell) throw std::out_of_range("SeparateVertex: index out of range");
  if (ell == 1) return Separation{Eigen::VectorXd::Zero(n), std::numeric_limits<double>::infinity()};

  // max t  s.t.  (p_j − p_i)·u − t ≥ 0 for i ≠ j,  −1 ≤ u ≤ 1.
  conic::ProgramBuilder b;
  std::vector<int> u(n);
  for (int k = 0; k < n; ++k) u[k] = b.AddFree();
  const int t = b.AddFree();
  double scale = 0.0;
  for (int i = 0; i < ell; ++i) {
    if (i == j) continue;
    const Eigen::VectorXd diff = (points.row(j) - points.row(i)).transpose();
    scale = std::max(scale, diff.lpNorm<Eigen::Infinity>());
    conic::LinearExpr row;
    for (int k = 0; k < n; ++k) {
      if (diff(k) != 0.0) row.AddTerm(u[k], diff(k));
    }
    row.AddTerm(t, -1.0);
    row.AddTerm(b.AddNonneg(), -1.0);
    b.AddEquality(row);
  }
  for (int k = 0; k < n; ++k) {
    conic::LinearExpr up = conic::LinearExpr::Var(u[k]);
    up.AddTerm(b.AddNonneg(), 1.0);
    b.AddEquality(up, 1.0);
    conic::LinearExpr lo = conic::LinearExpr::Var(u[k], -1.0);
    lo.AddTerm(b.AddNonneg(), 1.0);
    b.AddEquality(lo, 1.0);
  }
  b.AddObjective(conic::LinearExpr::Var(t, -1.0));
  const conic::ConicSolution sol = conic::Solve(b.Build());
  if (!sol.optimal()) {
    throw std::runtime_error("SeparateVertex: LP solve failed (" + conic::ToString(sol.status) + ")");
  }
  const double margin = sol.z(t);
  if (margin <= 1e-7 * (1.0 + scale)) return std::nullopt;
  Eigen::VectorXd dir(n);
  for (int k = 0; k < n; ++k) dir(k) = sol.z(u[k]);
  return Separation{dir, margin};
}

std::vector<int> ExtremePoints(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  std::vector<int> out;
  for (int j = 0; j < points.rows(); ++j) {
    if (SeparateVertex(points, j)) out.push_back(j);
  }
  return out;
}

std::vector<int> ExtremalExponents(const Signomial& f) {
  return ExtremePoints(f.exponents());
}

UnboundednessScreen ScreenUnbounded(const Signomial& f) {
  UnboundednessScreen out;
  const int n = f.num_vars();
  out.direction = Eigen::VectorXd::Zero(n);
  bool any_negative = false;
  for (int j = 0; j < f.num_terms(); ++j) {
    if (f.coeff(j) < 0.0 && !SameExponent(f.exponent(j), Eigen::VectorXd::Zero(n))) {
      any_negative = true;
    }
  }
  if (!any_negative) return out;

  Eigen::MatrixXd pts = f.exponents();
  if (!f.FindExponent(Eigen::VectorXd::Zero(n))) {
    pts.conservativeResize(pts.rows() + 1, Eigen::NoChange);
    pts.row(pts.rows() - 1).setZero();
  }
  for (int j = 0; j < f.num_terms(); ++j) {
    if (!(f.coeff(j) < 0.0) || SameExponent(f.exponent(j), Eigen::VectorXd::Zero(n))) {
      continue;
    }
    if (auto sep = SeparateVertex(pts, j)) {
      out.verdict = Boundedness::kUnboundedBelow;
      out.term = j;
      out.direction = sep->direction / sep->margin;
      return out;
    }
  }
  return out;
}

}  // namespace sagerel
