#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sagerel/hierarchy.h"
#include "sagerel/signomial.h"

namespace sagerel::testing {

inline Signomial TightSixTerm() {
  Eigen::MatrixXd a(7, 3);
  a << 0, 0, 0, 10.2, 0, 0, 0, 9.8, 0, 0, 0, 8.2, 1.5089, 1.0981, 1.3419, 1.0857, 1.9069,
      1.6192, 1.0459, 0.0492, 1.6245;
  Eigen::VectorXd c(7);
  c << 0, 10, 10, 10, -14.6794, -7.8601, 8.7838;
  return Signomial(a, c);
}

inline Signomial GapSixTerm() {
  Eigen::MatrixXd a(7, 3);
  a << 0, 0, 0, 10.2, 0, 0, 0, 9.8, 0, 0, 0, 8.2, 1.9864, 0.2010, 1.0855, 2.8242, 1.9355,
      2.0503, 0.1828, 2.7772, 1.9001;
  Eigen::VectorXd c(7);
  c << 0, 10, 10, 10, 7.5907, -10.9888, -13.9164;
  return Signomial(a, c);
}

/// TightSixTerm exponents with the given coefficients.
inline Signomial OnTightSupport(const Eigen::VectorXd& c) { return Signomial(TightSixTerm().exponents(), c); }

inline Signomial ConvexConstraint() {
  Eigen::VectorXd g(7);
  g << 1, -8, -8, -8, 0, -6.4, 0;
  return OnTightSupport(g);
}

inline Signomial NonconvexConstraint() {
  Eigen::VectorXd g(7);
  g << 0, -8, -8, -8, 0.7410, -0.4492, 1.4240;
  return OnTightSupport(g);
}

inline Signomial PerturbedTightSixTerm() {
  Eigen::MatrixXd a(7, 3);
  a << 0, 0, 0, 10.2070, 0.0082, -0.0039, -0.0081, 9.8024, -0.0097, 0.0070, -0.0156, 8.1923,
      1.5296, 1.0927, 1.3441, 1.0750, 1.9108, 1.6339, 1.0513, 0.0571, 1.6188;
  return Signomial(a, TightSixTerm().coeffs());
}

/// Gradient and Hessian of a signomial at x.
inline void Derivatives(const Signomial& f, const Eigen::VectorXd& x, Eigen::VectorXd* g,
                        Eigen::MatrixXd* h) {
  const Eigen::VectorXd w = f.coeffs().array() * (f.exponents() * x).array().exp();
  *g = f.exponents().transpose() * w;
  *h = f.exponents().transpose() * w.asDiagonal() * f.exponents();
}

/// Minimum of f over a uniform grid with `points` samples per axis on [lo, hi]^n.
inline double GridMinimum(const Signomial& f, int points, double lo, double hi) {
  const int n = f.num_vars();
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (int k = 0; k < n; ++k) x(k) = lo + (hi - lo) * idx[k] / (points - 1);
    best = std::min(best, f.Evaluate(x));
    int k = n - 1;
    while (k >= 0 && ++idx[k] == points) idx[k--] = 0;
    if (k < 0) break;
  }
  return best;
}

/// Local minimization by Newton steps on the shifted Hessian with Armijo
/// backtracking. Returns the final point.
inline Eigen::VectorXd LocalMinimize(const Signomial& f, Eigen::VectorXd x, int iters = 300) {
  const int n = f.num_vars();
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  for (int it = 0; it < iters; ++it) {
    Derivatives(f, x, &g, &h);
    if (g.norm() < 1e-13) break;
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues()(0);
    const double shift = std::max(0.0, 1e-8 - lmin) + 1e-12;
    Eigen::VectorXd step = -(h + shift * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) >= 0.0) step = -g;
    const double f0 = f.Evaluate(x);
    double t = 1.0;
    while (t > 1e-16 && !(f.Evaluate(x + t * step) <= f0 + 1e-4 * t * g.dot(step))) t *= 0.5;
    if (t <= 1e-16) break;
    x += t * step;
  }
  return x;
}

struct LocalResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
};

/// Best local minimum over random starts in [lo, hi]^n.
inline LocalResult MultistartMinimum(const Signomial& f, int starts, std::mt19937* rng,
                                     double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  LocalResult best;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x0(f.num_vars());
    for (int k = 0; k < x0.size(); ++k) x0(k) = u(*rng);
    const Eigen::VectorXd x = LocalMinimize(f, x0);
    const double v = f.Evaluate(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

/// min f s.t. P_k(x) ≤ 1 for posynomials f, P_k, by a log-barrier path with
/// damped Newton steps started from x = 0, which must be strictly feasible.
inline double GpOptimum(const Signomial& f, const std::vector<Signomial>& upper) {
  const int n = f.num_vars();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  auto barrier = [&](const Eigen::VectorXd& p, double t) {
    double v = t * f.Evaluate(p);
    for (const auto& q : upper) {
      const double slack = 1.0 - q.Evaluate(p);
      if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(slack);
    }
    return v;
  };
  for (double t = 1.0; t <= 1e12; t *= 10.0) {
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd g, gk;
      Eigen::MatrixXd h, hk;
      Derivatives(f, x, &g, &h);
      g *= t;
      h *= t;
      for (const auto& q : upper) {
        Derivatives(q, x, &gk, &hk);
        const double slack = 1.0 - q.Evaluate(x);
        g += gk / slack;
        h += hk / slack + gk * gk.transpose() / (slack * slack);
      }
      const Eigen::VectorXd step = -h.ldlt().solve(g);
      const double decrement = -g.dot(step);
      if (decrement < 1e-20) break;
      const double b0 = barrier(x, t);
      double s = 1.0;
      while (s > 1e-16 && !(barrier(x + s * step, t) <= b0 - 0.25 * s * decrement)) s *= 0.5;
      if (s <= 1e-16) break;
      x += s * step;
    }
  }
  return f.Evaluate(x);
}

/// Local minimum of f s.t. g_k(x) ≥ 0 along a log-barrier path from a
/// strictly feasible x; nonconvex curvature is handled by shifting the Hessian.
inline Eigen::VectorXd BarrierMinimize(const Signomial& f, const std::vector<Signomial>& gs,
                                       Eigen::VectorXd x) {
  const int n = f.num_vars();
  auto merit = [&](const Eigen::VectorXd& p, double mu) {
    double v = f.Evaluate(p);
    for (const auto& g : gs) {
      const double s = g.Evaluate(p);
      if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
      v -= mu * std::log(s);
    }
    return v;
  };
  for (double mu = 1e-1; mu >= 1e-13; mu *= 0.1) {
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd grad, gk;
      Eigen::MatrixXd hess, hk;
      Derivatives(f, x, &grad, &hess);
      for (const auto& g : gs) {
        Derivatives(g, x, &gk, &hk);
        const double s = g.Evaluate(x);
        grad -= mu * gk / s;
        hess += mu * (gk * gk.transpose() / (s * s) - hk / s);
      }
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess).eigenvalues()(0);
      const double shift = std::max(0.0, 1e-10 - lmin);
      Eigen::VectorXd step =
          -(hess + shift * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(grad);
      if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;
      if (-grad.dot(step) < 1e-22) break;
      const double m0 = merit(x, mu);
      double t = 1.0;
      while (t > 1e-16 && !(merit(x + t * step, mu) <= m0 + 1e-4 * t * grad.dot(step))) t *= 0.5;
      if (t <= 1e-16) break;
      x += t * step;
    }
  }
  return x;
}

/// Best BarrierMinimize value over strictly feasible random starts in [lo, hi]^n.
inline double ConstrainedMultistart(const Signomial& f, const std::vector<Signomial>& gs,
                                    int starts, std::mt19937* rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x0(f.num_vars());
    for (int k = 0; k < x0.size(); ++k) x0(k) = u(*rng);
    bool feasible = true;
    for (const auto& g : gs) feasible = feasible && g.Evaluate(x0) > 0.0;
    if (!feasible) continue;
    best = std::min(best, f.Evaluate(BarrierMinimize(f, gs, x0)));
  }
  return best;
}

/// Coercive n-variable signomial: positive terms at 2e_i and −(1,…,1), a
/// random constant, and `inner` terms of random sign at random convex
/// combinations of those vertices.
inline Signomial RandomBoundedSignomial(std::mt19937* rng, int n, int inner) {
  std::uniform_real_distribution<double> pos(0.5, 2.0), sym(-1.0, 1.0), w(0.0, 1.0);
  const int ell = n + 2 + inner;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ell, n);
  Eigen::VectorXd c(ell);
  c(0) = sym(*rng);
  for (int i = 0; i < n; ++i) {
    a(1 + i, i) = 2.0;
    c(1 + i) = pos(*rng);
  }
  a.row(n + 1).setConstant(-1.0);
  c(n + 1) = pos(*rng);
  for (int k = 0; k < inner; ++k) {
    Eigen::VectorXd lam(n + 1);
    for (int i = 0; i <= n; ++i) lam(i) = w(*rng) + 0.05;
    lam /= lam.sum();
    a.row(n + 2 + k) = lam.transpose() * a.middleRows(1, n + 1);
    c(n + 2 + k) = 2.0 * sym(*rng);
  }
  return Signomial(a, c);
}

/// A draw from the six-term random ensemble: zero constant, 10 at
/// the scaled axes (10.2, 9.8, 8.2), three exponents uniform in [0,3]^3 with
/// N(0, 10²) coefficients.
inline Signomial RandomEnsembleSignomial(std::mt19937* rng) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::normal_distribution<double> gauss(0.0, 10.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7, 3);
  a(1, 0) = 10.2;
  a(2, 1) = 9.8;
  a(3, 2) = 8.2;
  Eigen::VectorXd c(7);
  c << 0, 10, 10, 10, 0, 0, 0;
  for (int j = 4; j < 7; ++j) {
    for (int k = 0; k < 3; ++k) a(j, k) = u(*rng);
    c(j) = gauss(*rng);
  }
  return Signomial(a, c);
}

/// A random nonsingular matrix near the identity.
inline Eigen::MatrixXd RandomNonsingular(std::mt19937* rng, int n) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  while (true) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) += u(*rng);
    if (std::abs(m.determinant()) > 0.2) return m;
  }
}

/// Bounded objective with one constraint g = 1 + c1·e^{a1·x} + c2·e^{a2·x},
/// |c_i| ≤ 0.45, so the origin is strictly feasible.
inline SignomialProgram RandomProgram(std::mt19937* rng, int n) {
  std::uniform_real_distribution<double> coeff(-0.45, 0.45);
  std::uniform_real_distribution<double> expo(-1.0, 1.0);
  SignomialProgram sp{RandomBoundedSignomial(rng, n, 2), {}};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, n);
  Eigen::VectorXd c(3);
  c << 1.0, coeff(*rng), coeff(*rng);
  for (int j = 1; j < 3; ++j)
    for (int k = 0; k < n; ++k) a(j, k) = expo(*rng);
  sp.constraints.emplace_back(a, c);
  return sp;
}

}  // namespace sagerel::testing
