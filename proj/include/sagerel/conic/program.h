#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sagerel::conic {

enum class ConeKind { kFree, kNonneg, kExp };

/// A contiguous run of variables [start, start + size) in one cone.
/// Exp blocks have size 3 and hold (x, y, z) with y·exp(x/y) ≤ z.
struct ConeBlock {
  ConeKind kind;
  int start;
  int size;
};

/// min c'z + offset  s.t.  A z = b,  z ∈ K_1 × … × K_r.
struct ConicProgram {
  Eigen::VectorXd c;
  double objective_offset = 0.0;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<ConeBlock> blocks;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  /// Total barrier parameter of the cone (1 per orthant coordinate, 3 per
  /// exponential cone).
  int BarrierParameter() const;

  /// Throws std::invalid_argument when the layout or dimensions disagree.
  void Validate() const;
};

/// constant + Σ coeff·z[var].
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(double constant) : constant_(constant) {}  // NOLINT

  static LinearExpr Var(int index, double coeff = 1.0);

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }

  void AddTerm(int var, double coeff);
  void AddConstant(double value) { constant_ += value; }

  /// Sorted by variable, duplicates merged, exact zeros removed.
  LinearExpr Compacted() const;
  bool IsConstant() const;
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(double s);
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) {
    return a += b;
  }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) {
    return a -= b;
  }
  friend LinearExpr operator*(double s, LinearExpr a) { return a *= s; }
  friend LinearExpr operator-(LinearExpr a) { return a *= -1.0; }

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

struct ExpVar {
  int x;
  int y;
  int z;
};

/// Incrementally declares variables and equality rows. Variables are laid out
/// in declaration order; adjacent free or nonnegative scalars share a block.
class ProgramBuilder {
 public:
  int AddFree();
  int AddNonneg();
  ExpVar AddExp();

  /// Adds the row lhs − rhs = 0 and returns its index.
  int AddEquality(const LinearExpr& lhs, const LinearExpr& rhs = 0.0);
  /// Adds `expr` to the minimized objective.
  void AddObjective(const LinearExpr& expr);

  int num_vars() const { return static_cast<int>(kinds_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  ConeKind kind(int var) const { return kinds_[var]; }

  ConicProgram Build() const;

 private:
  int NewVar(ConeKind kind);

  std::vector<ConeKind> kinds_;
  std::vector<LinearExpr> rows_;
  LinearExpr objective_;
};

}  // namespace sagerel::conic
