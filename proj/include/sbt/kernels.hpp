#pragma once

#include "errors.hpp"
#include "types.hpp"

namespace sbt {

namespace detail {

inline double checked_norm(const Vec3& r) {
  const double n = r.norm();
  if (!(n >= 1e-14)) throw SingularPoint("kernel evaluated at |R| < 1e-14");
  return n;
}

}  // namespace detail

/// S(R) = I/|R| + R R^T/|R|^3.
inline Mat3 stokeslet(const Vec3& r) {
  const double n = detail::checked_norm(r);
  const double inv = 1.0 / n;
  return Mat3::Identity() * inv + (r * r.transpose()) * (inv * inv * inv);
}

/// D(R) = I/|R|^3 - 3 R R^T/|R|^5.
inline Mat3 doublet(const Vec3& r) {
  const double n = detail::checked_norm(r);
  const double inv2 = 1.0 / (n * n);
  const double inv3 = inv2 / n;
  return Mat3::Identity() * inv3 - (r * r.transpose()) * (3.0 * inv3 * inv2);
}

/// p^S(R) = R/|R|^3.
inline Vec3 pressure_kernel(const Vec3& r) {
  const double n = detail::checked_norm(r);
  return r / (n * n * n);
}

/// out[k](i, j) = d/dR_k S_ij(R).
inline Grad3 grad_stokeslet(const Vec3& r) {
  const double n = detail::checked_norm(r);
  const double inv3 = 1.0 / (n * n * n);
  const double inv5 = inv3 / (n * n);
  Grad3 g;
  for (int k = 0; k < 3; ++k) {
    Mat3& m = g[k];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double dik = i == k ? 1.0 : 0.0;
        const double djk = j == k ? 1.0 : 0.0;
        const double dij = i == j ? 1.0 : 0.0;
        m(i, j) = (-dij * r[k] + dik * r[j] + djk * r[i]) * inv3 - 3.0 * r[i] * r[j] * r[k] * inv5;
      }
    }
  }
  return g;
}

/// out[k](i, j) = d/dR_k D_ij(R).
inline Grad3 grad_doublet(const Vec3& r) {
  const double n = detail::checked_norm(r);
  const double inv5 = 1.0 / (n * n * n * n * n);
  const double inv7 = inv5 / (n * n);
  Grad3 g;
  for (int k = 0; k < 3; ++k) {
    Mat3& m = g[k];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double dik = i == k ? 1.0 : 0.0;
        const double djk = j == k ? 1.0 : 0.0;
        const double dij = i == j ? 1.0 : 0.0;
        m(i, j) = -3.0 * (dij * r[k] + dik * r[j] + djk * r[i]) * inv5 +
                  15.0 * r[i] * r[j] * r[k] * inv7;
      }
    }
  }
  return g;
}

/// Kernel responses to a single force f at offset R, for the line integrals.
/// grad(i, k) = d/dR_k [(S + c D) f]_i.
struct KernelApply {
  Vec3 velocity;
  double pressure = 0.0;
  Mat3 grad;
};

/// (S + c D) f, its R-gradient and R.f/|R|^3 in one pass, using the
/// contracted closed forms.
inline KernelApply apply_kernels(const Vec3& r, const Vec3& f, double doublet_weight) {
  const double n = detail::checked_norm(r);
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  const double inv3 = inv2 * inv;
  const double inv5 = inv3 * inv2;
  const double inv7 = inv5 * inv2;
  const double rf = r.dot(f);
  const double c = doublet_weight;

  KernelApply out;
  // S f = f/r + R (R.f)/r^3;  D f = f/r^3 - 3 R (R.f)/r^5
  out.velocity = f * (inv + c * inv3) + r * (rf * (inv3 - 3.0 * c * inv5));
  out.pressure = rf * inv3;
  // d_k (S f)_i = (-f_i R_k + d_ik R.f + R_i f_k)/r^3 - 3 R_i R_k R.f/r^5
  // d_k (D f)_i = -3 (f_i R_k + d_ik R.f + R_i f_k)/r^5 + 15 R_i R_k R.f/r^7
  const Mat3 fr = f * r.transpose();
  const Mat3 rf_outer = r * f.transpose();
  const Mat3 rr = r * r.transpose();
  out.grad = (-fr + rf_outer) * inv3 + Mat3::Identity() * (rf * inv3) - rr * (3.0 * rf * inv5);
  out.grad += c * ((-3.0 * inv5) * (fr + rf_outer + Mat3::Identity() * rf) + rr * (15.0 * rf * inv7));
  return out;
}

}  // namespace sbt
