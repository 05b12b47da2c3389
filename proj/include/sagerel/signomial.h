#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace sagerel {

inline constexpr std::size_t kDefaultTermLimit = 20000;

/// Thrown when a signomial or exponent set would exceed its term limit.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f(x) = Σ_j c_j exp(α_j · x). Exponents are stored as the rows of an
/// ℓ×n matrix and are pairwise distinct under SameExponent; the
/// constructor merges duplicates by summing their coefficients, keeping the
/// first occurrence's position.
class Signomial {
 public:
  Signomial(const Eigen::Ref<const Eigen::MatrixXd>& exponents,
            const Eigen::Ref<const Eigen::VectorXd>& coeffs);

  static Signomial Constant(int n, double value);
  /// A single term c·exp(α·x).
  static Signomial Monomial(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                            double c = 1.0);

  int num_vars() const { return static_cast<int>(exponents_.cols()); }
  int num_terms() const { return static_cast<int>(exponents_.rows()); }
  const Eigen::MatrixXd& exponents() const { return exponents_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd exponent(int j) const { return exponents_.row(j); }
  double coeff(int j) const { return coeffs_(j); }

  /// Index of the term whose exponent is identified with `alpha`.
  std::optional<int> FindExponent(
      const Eigen::Ref<const Eigen::VectorXd>& alpha) const;

  /// Compensated (Neumaier) sum of the terms.
  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Same function with every exponent mapped α ↦ Mα.
  Signomial TransformExponents(const Eigen::Ref<const Eigen::MatrixXd>& m) const;

  Signomial operator-() const;
  friend Signomial operator+(const Signomial& f, const Signomial& g);
  friend Signomial operator-(const Signomial& f, const Signomial& g);
  friend Signomial operator*(double s, const Signomial& f);

  /// Exact field equality (same term order, bitwise equal values).
  bool operator==(const Signomial& other) const;

 private:
  Eigen::MatrixXd exponents_;
  Eigen::VectorXd coeffs_;
};

/// True when f and g have the same multiset of (exponent, coefficient) pairs
/// up to term order, with coefficients equal to within `tol` relative.
bool SameTerms(const Signomial& f, const Signomial& g, double tol);

Signomial Multiply(const Signomial& f, const Signomial& g,
                   std::size_t term_limit = kDefaultTermLimit);

/// (Σ_{b ∈ base} e^{b·x})^p · f where base is {0} ∪ exponents(f).
Signomial MultiplierExpand(const Signomial& f, int p,
                           std::size_t term_limit = kDefaultTermLimit);

/// (Σ_{b ∈ base} e^{b·x})^p · f for an explicit base (rows).
Signomial MultiplierExpand(const Signomial& f,
                           const Eigen::Ref<const Eigen::MatrixXd>& base, int p,
                           std::size_t term_limit = kDefaultTermLimit);

/// E_p(base): all Σ_j λ_j·base_j with λ ∈ Z₊^ℓ and Σλ ≤ p.
struct ExponentSet {
  Eigen::MatrixXd base;
  int order = 0;
  /// Deduplicated elements as rows. Row 0 is the zero vector.
  Eigen::MatrixXd elements;
  /// generators[k] lists every multi-index mapping onto elements.row(k).
  std::vector<std::vector<std::vector<int>>> generators;

  int size() const { return static_cast<int>(elements.rows()); }
};

/// Multi-indices are enumerated in lexicographic order; the first multi-index
/// mapping onto a vector fixes that element's position.
ExponentSet MakeExponentSet(const Eigen::Ref<const Eigen::MatrixXd>& base,
                            int p, std::size_t limit = kDefaultTermLimit);

/// A direction u with ‖u‖∞ ≤ 1 and u·(points_j − points_i) ≥ margin > 0 for
/// all i ≠ j, when points_j is a vertex of the convex hull of the rows.
struct Separation {
  Eigen::VectorXd direction;
  double margin = 0.0;
};
std::optional<Separation> SeparateVertex(
    const Eigen::Ref<const Eigen::MatrixXd>& points, int j);

/// Indices of rows that are vertices of the convex hull of the rows.
std::vector<int> ExtremePoints(const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Indices j with exponent(j) a vertex of conv{exponent(i)}.
std::vector<int> ExtremalExponents(const Signomial& f);

enum class Boundedness { kUnboundedBelow, kInconclusive };

struct UnboundednessScreen {
  Boundedness verdict = Boundedness::kInconclusive;
  /// Term with negative coefficient at a vertex; -1 when inconclusive.
  int term = -1;
  /// direction·(α_term − α) ≥ 1 for every other exponent α and for 0, so
  /// f(t·direction) → −∞ as t → ∞.
  Eigen::VectorXd direction;
};

/// Reports UnboundedBelow when some vertex of conv({0} ∪ exponents) other
/// than the origin carries a negative coefficient.
UnboundednessScreen ScreenUnbounded(const Signomial& f);

}  // namespace sagerel
