#include "sagerel/conic/program.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sagerel::conic {

int ConicProgram::BarrierParameter() const {
  int nu = 0;
  for (const auto& blk : blocks) {
    if (blk.kind == ConeKind::kNonneg) nu += blk.size;
    if (blk.kind == ConeKind::kExp) nu += 3;
  }
  return nu;
}

void ConicProgram::Validate() const {
  const int n = num_vars();
  if (A.cols() != n) {
    throw std::invalid_argument("ConicProgram: A has " +
                                std::to_string(A.cols()) + " columns, expected " +
                                std::to_string(n));
  }
  if (A.rows() != num_rows()) {
    throw std::invalid_argument("ConicProgram: A row count differs from b");
  }
  int next = 0;
  for (const auto& blk : blocks) {
    if (blk.start != next || blk.size <= 0) {
      throw std::invalid_argument("ConicProgram: cone blocks are not contiguous");
    }
    if (blk.kind == ConeKind::kExp && blk.size != 3) {
      throw std::invalid_argument("ConicProgram: Exp block must have size 3");
    }
    next += blk.size;
  }
  if (next != n) {
    throw std::invalid_argument("ConicProgram: block sizes do not sum to dim(z)");
  }
  if (!c.allFinite() || !b.allFinite() || !std::isfinite(objective_offset)) {
    throw std::invalid_argument("ConicProgram: non-finite data");
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (!std::isfinite(it.value())) {
        throw std::invalid_argument("ConicProgram: non-finite entry in A");
      }
    }
  }
}

LinearExpr LinearExpr::Var(int index, double coeff) {
  LinearExpr e;
  e.AddTerm(index, coeff);
  return e;
}

void LinearExpr::AddTerm(int var, double coeff) {
  if (var < 0) throw std::invalid_argument("LinearExpr: negative variable index");
  terms_.emplace_back(var, coeff);
}

LinearExpr LinearExpr::Compacted() const {
  LinearExpr out(constant_);
  auto sorted = terms_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [var, coeff] : sorted) {
    if (!out.terms_.empty() && out.terms_.back().first == var) {
      out.terms_.back().second += coeff;
    } else {
      out.terms_.emplace_back(var, coeff);
    }
  }
  std::erase_if(out.terms_, [](const auto& t) { return t.second == 0.0; });
  return out;
}

bool LinearExpr::IsConstant() const { return Compacted().terms_.empty(); }

double LinearExpr::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  double v = constant_;
  for (const auto& [var, coeff] : terms_) v += coeff * z(var);
  return v;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  constant_ += other.constant_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  constant_ -= other.constant_;
  for (const auto& [var, coeff] : other.terms_) terms_.emplace_back(var, -coeff);
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& t : terms_) t.second *= s;
  return *this;
}

int ProgramBuilder::NewVar(ConeKind kind) {
  kinds_.push_back(kind);
  return num_vars() - 1;
}

int ProgramBuilder::AddFree() { return NewVar(ConeKind::kFree); }
int ProgramBuilder::AddNonneg() { return NewVar(ConeKind::kNonneg); }

ExpVar ProgramBuilder::AddExp() {
  const int x = NewVar(ConeKind::kExp);
  NewVar(ConeKind::kExp);
  NewVar(ConeKind::kExp);
  return {x, x + 1, x + 2};
}

int ProgramBuilder::AddEquality(const LinearExpr& lhs, const LinearExpr& rhs) {
  LinearExpr row = (lhs - rhs).Compacted();
  for (const auto& [var, coeff] : row.terms()) {
    if (var >= num_vars()) {
      throw std::invalid_argument("ProgramBuilder: row references unknown variable");
    }
  }
  rows_.push_back(std::move(row));
  return num_rows() - 1;
}

void ProgramBuilder::AddObjective(const LinearExpr& expr) {
  for (const auto& [var, coeff] : expr.terms()) {
    if (var >= num_vars()) {
      throw std::invalid_argument("ProgramBuilder: objective references unknown variable");
    }
  }
  objective_ += expr;
}

ConicProgram ProgramBuilder::Build() const {
  ConicProgram prog;
  const int n = num_vars();
  const int m = num_rows();
  prog.c = Eigen::VectorXd::Zero(n);
  const LinearExpr obj = objective_.Compacted();
  for (const auto& [var, coeff] : obj.terms()) prog.c(var) += coeff;
  prog.objective_offset = obj.constant();

  std::vector<Eigen::Triplet<double>> trips;
  prog.b.resize(m);
  for (int r = 0; r < m; ++r) {
    prog.b(r) = -rows_[r].constant();
    for (const auto& [var, coeff] : rows_[r].terms()) trips.emplace_back(r, var, coeff);
  }
  prog.A.resize(m, n);
  prog.A.setFromTriplets(trips.begin(), trips.end());
  prog.A.makeCompressed();

  for (int i = 0; i < n;) {
    const ConeKind kind = kinds_[i];
    if (kind == ConeKind::kExp) {
      prog.blocks.push_back({kind, i, 3});
      i += 3;
      continue;
    }
    int j = i;
    while (j < n && kinds_[j] == kind) ++j;
    prog.blocks.push_back({kind, i, j - i});
    i = j;
  }
  return prog;
}

}  // namespace sagerel::conic
