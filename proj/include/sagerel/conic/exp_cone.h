#pragma once

#include <Eigen/Dense>

// The exponential cone K = cl{(x, y, z) : y > 0, y·exp(x/y) ≤ z} and its
// logarithmically homogeneous barrier
//   F(s) = −log(y·log(z/y) − x) − log y − log z,   parameter 3.
namespace sagerel::conic::exp_cone {

bool InPrimalInterior(const Eigen::Vector3d& s);

/// Dual cone K* = cl{(u, v, w) : u < 0, −u·exp(v/u − 1) ≤ w}.
bool InDualInterior(const Eigen::Vector3d& z);

/// Membership in K with relative slack `tol`, including the y = 0 rays.
bool InClosure(const Eigen::Vector3d& s, double tol);

Eigen::Vector3d Gradient(const Eigen::Vector3d& s);
Eigen::Matrix3d Hessian(const Eigen::Vector3d& s);

/// ∇²F(s)⁻¹·r without forming the Hessian.
Eigen::Vector3d InverseHessianProduct(const Eigen::Vector3d& s, const Eigen::Vector3d& r);

/// ∇³F(s)[u, u].
Eigen::Vector3d ThirdOrder(const Eigen::Vector3d& s, const Eigen::Vector3d& u);

/// The point with s = −∇F(s), which is self-dual central.
Eigen::Vector3d CentralPoint();

}  // namespace sagerel::conic::exp_cone
