#include "sagerel/exponent_index.h"

#include <cmath>
#include <stdexcept>

namespace sagerel {

bool SameExponent(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) return false;
  if (a.size() == 0) return true;
  const double tol = 1e-9 * (1.0 + a.lpNorm<Eigen::Infinity>());
  return (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

ExponentIndex::ExponentIndex(int n) : n_(n), weights_(n) {
  if (n < 0) throw std::invalid_argument("ExponentIndex: negative dimension");
  for (int i = 0; i < n; ++i) weights_(i) = 1.0 / (i + 1.6180339887498949);
  weight_sum_ = weights_.sum();
}

double ExponentIndex::Key(const Eigen::Ref<const Eigen::VectorXd>& a) const {
  return weights_.dot(a);
}

std::optional<int> ExponentIndex::Find(
    const Eigen::Ref<const Eigen::VectorXd>& a) const {
  if (a.size() != n_) {
    throw std::invalid_argument("ExponentIndex: dimension mismatch");
  }
  const double key = Key(a);
  const double radius =
      2e-9 * (1.0 + a.lpNorm<Eigen::Infinity>()) * weight_sum_ + 1e-300;
  auto it = by_key_.lower_bound(key - radius);
  const auto end = by_key_.upper_bound(key + radius);
  std::optional<int> best;
  for (; it != end; ++it) {
    if (SameExponent(points_[it->second], a)) {
      if (!best || it->second < *best) best = it->second;
    }
  }
  return best;
}

std::pair<int, bool> ExponentIndex::Insert(
    const Eigen::Ref<const Eigen::VectorXd>& a) {
  if (auto found = Find(a)) return {*found, false};
  const int idx = size();
  points_.emplace_back(a);
  by_key_.emplace(Key(a), idx);
  return {idx, true};
}

Eigen::MatrixXd ExponentIndex::ToMatrix() const {
  Eigen::MatrixXd m(size(), n_);
  for (int i = 0; i < size(); ++i) m.row(i) = points_[i].transpose();
  return m;
}

}  // namespace sagerel
