#include "sagerel/conic/exp_cone.h"

#include <cmath>

namespace sagerel::conic::exp_cone {

bool InPrimalInterior(const Eigen::Vector3d& s) {
  const double x = s(0), y = s(1), z = s(2);
  if (!(y > 0.0) || !(z > 0.0)) return false;
  const double psi = y * std::log(z / y) - x;
  return psi > 0.0 && std::isfinite(psi);
}

bool InDualInterior(const Eigen::Vector3d& z) {
  const double u = z(0), v = z(1), w = z(2);
  if (!(u < 0.0) || !(w > 0.0)) return false;
  const double lhs = std::log(-u) + v / u - 1.0;
  return lhs < std::log(w) && std::isfinite(lhs);
}

bool InClosure(const Eigen::Vector3d& s, double tol) {
  const double x = s(0), y = s(1), z = s(2);
  const double scale = 1.0 + s.lpNorm<Eigen::Infinity>();
  if (y < -tol * scale || z < -tol * scale) return false;
  if (y <= tol * scale) return x <= tol * scale;
  if (x / y > 700.0) return false;
  return y * std::exp(x / y) <= z * (1.0 + tol) + tol * scale;
}

Eigen::Vector3d Gradient(const Eigen::Vector3d& s) {
  const double x = s(0), y = s(1), z = s(2);
  const double lzy = std::log(z / y);
  const double psi = y * lzy - x;
  Eigen::Vector3d dpsi(-1.0, lzy - 1.0, y / z);
  Eigen::Vector3d g = -dpsi / psi;
  g(1) -= 1.0 / y;
  g(2) -= 1.0 / z;
  return g;
}

Eigen::Matrix3d Hessian(const Eigen::Vector3d& s) {
  const double x = s(0), y = s(1), z = s(2);
  const double lzy = std::log(z / y);
  const double psi = y * lzy - x;
  Eigen::Vector3d dpsi(-1.0, lzy - 1.0, y / z);
  Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
  d2psi(1, 1) = -1.0 / y;
  d2psi(1, 2) = 1.0 / z;
  d2psi(2, 1) = 1.0 / z;
  d2psi(2, 2) = -y / (z * z);
  Eigen::Matrix3d h = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
  h(1, 1) += 1.0 / (y * y);
  h(2, 2) += 1.0 / (z * z);
  return h;
}

Eigen::Vector3d InverseHessianProduct(const Eigen::Vector3d& s, const Eigen::Vector3d& r) {
  const double x = s(0), y = s(1), z = s(2);
  const double lzy = std::log(z / y);
  const double psi = y * lzy - x;
  // H = M + w·w' with w = ∇ψ/ψ and M vanishing on the first coordinate.
  const double wy = (lzy - 1.0) / psi;
  const double wz = y / (z * psi);
  const double t = -psi * r(0);
  const double m11 = 1.0 / (y * psi) + 1.0 / (y * y);
  const double m12 = -1.0 / (z * psi);
  const double m22 = y / (z * z * psi) + 1.0 / (z * z);
  const double det = (2.0 * y + psi) / (y * y * z * z * psi);
  const double ry = r(1) - wy * t;
  const double rz = r(2) - wz * t;
  const double dy = (m22 * ry - m12 * rz) / det;
  const double dz = (m11 * rz - m12 * ry) / det;
  const double dx = -psi * (t - wy * dy - wz * dz);
  return Eigen::Vector3d(dx, dy, dz);
}

Eigen::Vector3d ThirdOrder(const Eigen::Vector3d& s, const Eigen::Vector3d& u) {
  const double x = s(0), y = s(1), z = s(2);
  const double lzy = std::log(z / y);
  const double psi = y * lzy - x;
  const Eigen::Vector3d dpsi(-1.0, lzy - 1.0, y / z);
  Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
  d2psi(1, 1) = -1.0 / y;
  d2psi(1, 2) = 1.0 / z;
  d2psi(2, 1) = 1.0 / z;
  d2psi(2, 2) = -y / (z * z);
  const double a = dpsi.dot(u);
  const Eigen::Vector3d d2u = d2psi * u;
  const double ud2u = u.dot(d2u);
  const Eigen::Vector3d d3uu(0.0, u(1) * u(1) / (y * y) - u(2) * u(2) / (z * z),
                             -2.0 * u(1) * u(2) / (z * z) + 2.0 * y * u(2) * u(2) / (z * z * z));
  Eigen::Vector3d out = (2.0 * a * d2u + ud2u * dpsi) / (psi * psi) -
                        2.0 * a * a * dpsi / (psi * psi * psi) - d3uu / psi;
  out(1) -= 2.0 * u(1) * u(1) / (y * y * y);
  out(2) -= 2.0 * u(2) * u(2) / (z * z * z);
  return out;
}

Eigen::Vector3d CentralPoint() {
  return {-0.8278383990656786, 0.8051020015847954, 1.2909277098569580};
}

}  // namespace sagerel::conic::exp_cone
