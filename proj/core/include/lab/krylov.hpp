#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace lab {

/// Matrix-free Krylov kernels used by the state and Hammerstein solvers.
/// All reductions run in fixed index order, so results are deterministic.

using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct KrylovResult {
  int iterations = 0;
  double residual_norm = 0.0;  // 2-norm of the linear residual
  bool converged = false;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Conjugate gradients for SPD operators. Solves A x = b in place (x holds
/// the initial guess on entry). Stops when ||b - A x||_2 <= tol.
inline KrylovResult conjugate_gradient(const ApplyFn& apply, const std::vector<double>& b,
                                       std::vector<double>& x, double tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  p = r;
  double rr = dot(r, r);
  KrylovResult res;
  res.residual_norm = std::sqrt(rr);
  if (res.residual_norm <= tol) {
    res.converged = true;
    return res;
  }
  for (int it = 0; it < max_iter; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // lost positive-definiteness numerically
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    res.iterations = it + 1;
    res.residual_norm = std::sqrt(rr_new);
    if (res.residual_norm <= tol) {
      res.converged = true;
      return res;
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  return res;
}

/// BiCGStab for general nonsymmetric operators; same calling convention.
inline KrylovResult bicgstab(const ApplyFn& apply, const std::vector<double>& b,
                             std::vector<double>& x, double tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n);
  apply(x, v);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::fill(p.begin(), p.end(), 0.0);
  std::fill(v.begin(), v.end(), 0.0);
  KrylovResult res;
  res.residual_norm = norm2(r);
  if (res.residual_norm <= tol) {
    res.converged = true;
    return res;
  }
  for (int it = 0; it < max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    apply(p, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho_new / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
      res.iterations = it + 1;
      res.residual_norm = norm2(s);
      res.converged = true;
      return res;
    }
    apply(s, t);
    const double tt = dot(t, t);
    if (tt == 0.0) break;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    res.iterations = it + 1;
    res.residual_norm = norm2(r);
    if (res.residual_norm <= tol) {
      res.converged = true;
      return res;
    }
    if (omega == 0.0) break;
  }
  return res;
}

}  // namespace lab
