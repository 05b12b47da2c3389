#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sagerel {

/// Returns true when ‖a − b‖∞ ≤ 1e-9·(1 + ‖a‖∞).
bool SameExponent(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b);

/// An insertion-ordered set of exponent vectors under the SameExponent
/// identification. Lookups are O(log k + hits).
class ExponentIndex {
 public:
  explicit ExponentIndex(int n);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(points_.size()); }
  const Eigen::VectorXd& at(int i) const { return points_[i]; }

  std::optional<int> Find(const Eigen::Ref<const Eigen::VectorXd>& a) const;

  /// Inserts `a` unless an identified exponent is already stored. Returns the
  /// index of the stored representative and whether an insertion happened.
  std::pair<int, bool> Insert(const Eigen::Ref<const Eigen::VectorXd>& a);

  /// Rows are the stored exponents in insertion order.
  Eigen::MatrixXd ToMatrix() const;

 private:
  double Key(const Eigen::Ref<const Eigen::VectorXd>& a) const;

  int n_;
  Eigen::VectorXd weights_;
  double weight_sum_;
  std::vector<Eigen::VectorXd> points_;
  std::multimap<double, int> by_key_;
};

}  // namespace sagerel
