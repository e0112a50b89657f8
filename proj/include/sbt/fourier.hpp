#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace sbt {

/// One wavenumber of a 1-periodic vector function:
/// cos * cos(2 pi k s) + sin * sin(2 pi k s). For k = 0 only `cos` matters.
struct FourierMode {
  int k = 0;
  Vec3 cos = Vec3::Zero();
  Vec3 sin = Vec3::Zero();
};

/// Value and first two derivatives of a curve-like quantity at one point.
struct Jet3 {
  Vec3 d0 = Vec3::Zero();
  Vec3 d1 = Vec3::Zero();
  Vec3 d2 = Vec3::Zero();
};

/// Dense truncated Fourier series of a 1-periodic R^3-valued function.
/// Evaluation uses the rotation recurrence for exp(2 pi i k s), so the cost is
/// linear in the highest wavenumber.
class FourierSeries3 {
 public:
  FourierSeries3() = default;

  explicit FourierSeries3(std::span<const FourierMode> modes) {
    int kmax = 0;
    for (const auto& m : modes) {
      if (m.k < 0) throw std::invalid_argument("Fourier wavenumber must be non-negative");
      kmax = std::max(kmax, m.k);
    }
    a_.assign(kmax + 1, Vec3::Zero());
    b_.assign(kmax + 1, Vec3::Zero());
    for (const auto& m : modes) {
      a_[m.k] += m.cos;
      if (m.k > 0) b_[m.k] += m.sin;
    }
  }

  /// Trigonometric interpolant of uniform samples y_j = f(j / N), truncated
  /// after the last wavenumber whose coefficients exceed tail_tol * scale.
  static FourierSeries3 interpolate(std::span<const Vec3> samples, double tail_tol = 0.0) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("need at least two samples to interpolate");
    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double arg = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      cos_table[j] = std::cos(arg);
      sin_table[j] = std::sin(arg);
    }
    const std::size_t kmax = n / 2;
    FourierSeries3 out;
    out.a_.assign(kmax + 1, Vec3::Zero());
    out.b_.assign(kmax + 1, Vec3::Zero());
    for (std::size_t k = 0; k <= kmax; ++k) {
      Vec3 ca = Vec3::Zero(), sb = Vec3::Zero();
      std::size_t idx = 0;
      for (std::size_t j = 0; j < n; ++j) {
        ca += cos_table[idx] * samples[j];
        sb += sin_table[idx] * samples[j];
        idx += k;
        if (idx >= n) idx -= n;
      }
      const bool nyquist = (n % 2 == 0) && (k == kmax);
      const double w = (k == 0 || nyquist) ? 1.0 / n : 2.0 / n;
      out.a_[k] = w * ca;
      out.b_[k] = nyquist ? Vec3::Zero() : Vec3(w * sb);
    }
    out.truncate(tail_tol);
    return out;
  }

  Vec3 value(double s) const { return jet(s, 0).d0; }

  Jet3 jet(double s, int max_order = 2) const {
    Jet3 out;
    if (a_.empty()) return out;
    out.d0 = a_[0];
    const double arg = kTwoPi * s;
    const double c1 = std::cos(arg), s1 = std::sin(arg);
    double ck = 1.0, sk = 0.0;
    for (std::size_t k = 1; k < a_.size(); ++k) {
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
      const Vec3& a = a_[k];
      const Vec3& b = b_[k];
      out.d0 += ck * a + sk * b;
      if (max_order >= 1) {
        const double w = kTwoPi * static_cast<double>(k);
        out.d1 += w * (-sk * a + ck * b);
        if (max_order >= 2) out.d2 -= (w * w) * (ck * a + sk * b);
      }
    }
    return out;
  }

  std::vector<FourierMode> modes() const {
    std::vector<FourierMode> out;
    for (std::size_t k = 0; k < a_.size(); ++k) {
      if (a_[k].isZero(0.0) && b_[k].isZero(0.0)) continue;
      out.push_back({static_cast<int>(k), a_[k], b_[k]});
    }
    return out;
  }

  int max_wavenumber() const { return a_.empty() ? 0 : static_cast<int>(a_.size()) - 1; }

  /// Largest coefficient magnitude among wavenumbers >= k0.
  double tail_magnitude(std::size_t k0) const {
    double m = 0.0;
    for (std::size_t k = k0; k < a_.size(); ++k)
      m = std::max({m, a_[k].cwiseAbs().maxCoeff(), b_[k].cwiseAbs().maxCoeff()});
    return m;
  }

  double scale() const { return tail_magnitude(0); }

  FourierSeries3 scaled(double factor) const {
    FourierSeries3 out = *this;
    for (auto& v : out.a_) v *= factor;
    for (auto& v : out.b_) v *= factor;
    return out;
  }

 private:
  void truncate(double tail_tol) {
    if (tail_tol <= 0.0) return;
    const double cutoff = tail_tol * std::max(scale(), 1e-300);
    std::size_t keep = a_.size();
    while (keep > 1) {
      const auto k = keep - 1;
      if (a_[k].cwiseAbs().maxCoeff() > cutoff || b_[k].cwiseAbs().maxCoeff() > cutoff) break;
      --keep;
    }
    a_.resize(keep);
    b_.resize(keep);
  }

  std::vector<Vec3> a_;  // cosine coefficients, index = wavenumber
  std::vector<Vec3> b_;  // sine coefficients
};

}  // namespace sbt
