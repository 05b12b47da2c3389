#include "sagerel/hierarchy.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sagerel/conic/program.h"
#include "sagerel/exponent_index.h"

namespace sagerel {

using conic::LinearExpr;
using conic::ProgramBuilder;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd BaseWithZero(int n, const std::vector<const Signomial*>& parts) {
  ExponentIndex index(n);
  index.Insert(Eigen::VectorXd::Zero(n));
  for (const Signomial* s : parts) {
    for (int j = 0; j < s->num_terms(); ++j) index.Insert(s->exponent(j));
  }
  return index.ToMatrix();
}

// Solves max γ with the given coefficient expressions over `support`, where
// γ is variable `gamma` of `b`, and fills the common fields of `res`.
void SolveLifted(ProgramBuilder* b, int gamma, const ExponentIndex& lifted,
                 const std::vector<LinearExpr>& coeffs, const HierarchyOptions& options,
                 RelaxationResult* res, conic::ConicSolution* out_sol) {
  res->lifted_support = lifted.ToMatrix();
  const SageConstraint sc = AddSageConstraint(b, res->lifted_support, coeffs);
  b->AddObjective(LinearExpr::Var(gamma, -1.0));
  const conic::ConicProgram prog = b->Build();
  const conic::ConicSolution sol = conic::Solve(prog, options.solver);
  res->solver_status = sol.status;
  res->iterations = sol.iterations;
  switch (sol.status) {
    case conic::SolveStatus::kOptimal:
    case conic::SolveStatus::kAlmostOptimal:
      res->status = BoundStatus::kOptimal;
      break;
    case conic::SolveStatus::kPrimalInfeasible:
      res->status = BoundStatus::kNoBound;
      res->lower_bound = -kInf;
      break;
    case conic::SolveStatus::kDualInfeasible:
      res->status = BoundStatus::kPlusInfinity;
      res->lower_bound = kInf;
      break;
    default:
      res->status = BoundStatus::kIndeterminate;
      break;
  }
  if (res->status != BoundStatus::kOptimal) {
    *out_sol = sol;
    return;
  }
  res->lower_bound = sol.z(gamma);
  const int ell = lifted.size();
  res->lifted_coeffs.resize(ell);
  for (int k = 0; k < ell; ++k) res->lifted_coeffs(k) = coeffs[k].Evaluate(sol.z);
  res->certificate = sc.Certificate(sol.z);
  res->moments = Eigen::VectorXd::Zero(ell);
  res->moments_observed.assign(ell, false);
  for (int k = 0; k < ell; ++k) {
    if (sc.coeff_rows[k] >= 0) {
      res->moments(k) = -sol.y(sc.coeff_rows[k]);
      res->moments_observed[k] = true;
    }
  }
  *out_sol = sol;
}

void FillBaseRows(const ExponentIndex& lifted, RelaxationResult* res) {
  res->base_rows.clear();
  for (int j = 0; j < res->base_support.rows(); ++j) {
    const auto row = lifted.Find(res->base_support.row(j).transpose());
    res->base_rows.push_back(row ? *row : -1);
  }
}

}  // namespace

std::string ToString(BoundStatus status) {
  switch (status) {
    case BoundStatus::kOptimal:
      return "Optimal";
    case BoundStatus::kMinusInfinity:
      return "MinusInfinity";
    case BoundStatus::kNoBound:
      return "NoBound";
    case BoundStatus::kPlusInfinity:
      return "PlusInfinity";
    case BoundStatus::kIndeterminate:
      return "Indeterminate";
  }
  return "Unknown";
}

Eigen::MatrixXd SignomialProgram::Support() const {
  std::vector<const Signomial*> parts{&objective};
  for (const auto& g : constraints) parts.push_back(&g);
  return BaseWithZero(num_vars(), parts);
}

void SignomialProgram::Validate() const {
  for (const auto& g : constraints) {
    if (g.num_vars() != objective.num_vars()) {
      throw std::invalid_argument("SignomialProgram: constraint dimension differs from objective");
    }
  }
}

RelaxationResult UnconstrainedBound(const Signomial& f, int p, const HierarchyOptions& options) {
  if (p < 0) throw std::invalid_argument("UnconstrainedBound: p must be nonnegative");
  const int n = f.num_vars();
  RelaxationResult res;
  res.p = p;
  res.base_support = BaseWithZero(n, {&f});

  const UnboundednessScreen screen = ScreenUnbounded(f);
  if (screen.verdict == Boundedness::kUnboundedBelow) {
    res.status = BoundStatus::kMinusInfinity;
    res.lower_bound = -kInf;
    return res;
  }

  const Signomial lifted_f = MultiplierExpand(f, res.base_support, p, options.term_limit);
  const Signomial lifted_one =
      MultiplierExpand(Signomial::Constant(n, 1.0), res.base_support, p, options.term_limit);
  ExponentIndex lifted(n);
  lifted.Insert(Eigen::VectorXd::Zero(n));
  for (int j = 0; j < lifted_f.num_terms(); ++j) lifted.Insert(lifted_f.exponent(j));
  for (int j = 0; j < lifted_one.num_terms(); ++j) lifted.Insert(lifted_one.exponent(j));

  ProgramBuilder b;
  const int gamma = b.AddFree();
  std::vector<LinearExpr> coeffs(lifted.size());
  for (int j = 0; j < lifted_f.num_terms(); ++j) {
    coeffs[*lifted.Find(lifted_f.exponent(j))].AddConstant(lifted_f.coeff(j));
  }
  for (int j = 0; j < lifted_one.num_terms(); ++j) {
    coeffs[*lifted.Find(lifted_one.exponent(j))].AddTerm(gamma, -lifted_one.coeff(j));
  }
  conic::ConicSolution sol;
  SolveLifted(&b, gamma, lifted, coeffs, options, &res, &sol);
  FillBaseRows(lifted, &res);
  return res;
}

std::vector<Signomial> Products(const std::vector<Signomial>& constraints, int q,
                                std::size_t term_limit) {
  if (q < 0) throw std::invalid_argument("Products: q must be nonnegative");
  if (constraints.empty()) return {};
  const int n = constraints.front().num_vars();
  const int m = static_cast<int>(constraints.size());
  std::vector<Signomial> out;
  auto add_unique = [&](const Signomial& s) {
    for (const auto& existing : out) {
      if (SameTerms(existing, s, 1e-12)) return;
    }
    out.push_back(s);
  };
  // Nondecreasing index sequences over {0 = constant 1, 1..m}.
  std::vector<int> idx(q, 0);
  while (true) {
    Signomial prod = Signomial::Constant(n, 1.0);
    for (int k : idx) {
      if (k > 0) prod = Multiply(prod, constraints[k - 1], term_limit);
    }
    add_unique(prod);
    int pos = q - 1;
    while (pos >= 0 && idx[pos] == m) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int r = pos + 1; r < q; ++r) idx[r] = idx[pos];
  }
  return out;
}

RelaxationResult ConstrainedBound(const SignomialProgram& sp, int p, int q,
                                  const HierarchyOptions& options) {
  if (p < 0 || q < 0) throw std::invalid_argument("ConstrainedBound: p, q must be nonnegative");
  sp.Validate();
  if (q == 0 || sp.constraints.empty()) {
    RelaxationResult res = UnconstrainedBound(sp.objective, p, options);
    res.q = q;
    return res;
  }
  const int n = sp.num_vars();
  RelaxationResult res;
  res.p = p;
  res.q = q;
  res.base_support = sp.Support();
  res.products = Products(sp.constraints, q, options.term_limit);
  const Eigen::MatrixXd multiplier_support =
      MakeExponentSet(res.base_support, p, options.term_limit).elements;
  const int num_mult = static_cast<int>(multiplier_support.rows());

  ProgramBuilder b;
  const int gamma = b.AddFree();
  std::vector<std::vector<int>> sigma(res.products.size());
  for (size_t h = 0; h < res.products.size(); ++h) {
    std::vector<LinearExpr> mult_coeffs;
    for (int e = 0; e < num_mult; ++e) {
      sigma[h].push_back(b.AddFree());
      mult_coeffs.push_back(LinearExpr::Var(sigma[h].back()));
    }
    AddSageConstraint(&b, multiplier_support, mult_coeffs);
  }

  ExponentIndex lifted(n);
  lifted.Insert(Eigen::VectorXd::Zero(n));
  std::vector<LinearExpr> coeffs(1);
  auto slot = [&](const Eigen::VectorXd& alpha) -> LinearExpr& {
    auto [k, inserted] = lifted.Insert(alpha);
    if (static_cast<std::size_t>(lifted.size()) > options.term_limit) {
      throw CapacityError("lifted support exceeds the term limit");
    }
    if (inserted) coeffs.emplace_back();
    return coeffs[k];
  };
  for (int j = 0; j < sp.objective.num_terms(); ++j) {
    slot(sp.objective.exponent(j)).AddConstant(sp.objective.coeff(j));
  }
  coeffs[0].AddTerm(gamma, -1.0);
  for (size_t h = 0; h < res.products.size(); ++h) {
    const Signomial& prod = res.products[h];
    for (int e = 0; e < num_mult; ++e) {
      for (int t = 0; t < prod.num_terms(); ++t) {
        const Eigen::VectorXd alpha = multiplier_support.row(e).transpose() + prod.exponent(t);
        slot(alpha).AddTerm(sigma[h][e], -prod.coeff(t));
      }
    }
  }

  conic::ConicSolution sol;
  SolveLifted(&b, gamma, lifted, coeffs, options, &res, &sol);
  FillBaseRows(lifted, &res);
  if (res.status == BoundStatus::kOptimal) {
    for (size_t h = 0; h < res.products.size(); ++h) {
      Eigen::VectorXd s(num_mult);
      for (int e = 0; e < num_mult; ++e) s(e) = sol.z(sigma[h][e]);
      res.multipliers.emplace_back(multiplier_support, s);
    }
  }
  return res;
}

SignomialProgram AddBoxConstraints(const SignomialProgram& sp, double upper, double lower) {
  if (!(lower > 0.0) || !(upper >= lower) || !std::isfinite(upper)) {
    throw std::invalid_argument("AddBoxConstraints: require 0 < L ≤ U < ∞");
  }
  sp.Validate();
  const int n = sp.num_vars();
  ExponentIndex support(n);
  for (int j = 0; j < sp.objective.num_terms(); ++j) support.Insert(sp.objective.exponent(j));
  for (const auto& g : sp.constraints) {
    for (int j = 0; j < g.num_terms(); ++j) support.Insert(g.exponent(j));
  }
  SignomialProgram out = sp;
  for (int k = 0; k < support.size(); ++k) {
    const Signomial term = Signomial::Monomial(support.at(k));
    out.constraints.push_back(Signomial::Constant(n, upper) - term);
    out.constraints.push_back(term - Signomial::Constant(n, lower));
  }
  return out;
}

ConvergenceConditions CheckConvergenceConditions(const Signomial& f, double tol) {
  ConvergenceConditions out;
  const int n = f.num_vars();
  if (f.num_terms() < n + 1) return out;
  const Eigen::MatrixXd lead = f.exponents().topRows(n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(lead.transpose());
  out.independent = lu.rank() == n;
  out.leading_positive = (f.coeffs().head(n).array() > 0.0).all();
  out.zero_present = f.exponent(n).lpNorm<Eigen::Infinity>() <= tol;
  if (!out.independent) return out;
  out.remaining_interior = true;
  for (int j = n + 1; j < f.num_terms(); ++j) {
    // Barycentric weights of α_j against α_1..α_n; the zero vertex takes the rest.
    const Eigen::VectorXd lambda = lu.solve(f.exponent(j));
    const double total = lambda.sum();
    if (lambda.minCoeff() < -tol || total > 1.0 + tol || total >= 1.0 - tol) {
      out.remaining_interior = false;
    }
  }
  return out;
}

Signomial LiftedSignomial(const RelaxationResult& res) {
  if (res.lifted_coeffs.size() == 0) {
    throw std::invalid_argument("LiftedSignomial: result carries no coefficients");
  }
  return Signomial(res.lifted_support, res.lifted_coeffs);
}

}  // namespace sagerel
