#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "fourier.hpp"
#include "types.hpp"

namespace sbt {

/// 1-periodic line force density f(s), stored as a Fourier series in
/// arclength.
class ForceDensity {
 public:
  ForceDensity() = default;

  static ForceDensity from_modes(std::span<const FourierMode> modes) {
    ForceDensity f;
    f.series_ = FourierSeries3(modes);
    return f;
  }

  /// Trigonometric interpolant of f(j / N).
  static ForceDensity from_samples(std::span<const Vec3> samples) {
    ForceDensity f;
    f.series_ = FourierSeries3::interpolate(samples, 0.0);
    return f;
  }

  static ForceDensity constant(const Vec3& v) {
    const FourierMode m{0, v, Vec3::Zero()};
    return from_modes(std::span(&m, 1));
  }

  static ForceDensity zero() { return constant(Vec3::Zero()); }

  Vec3 value(double s) const { return series_.jet(wrap_unit(s), 0).d0; }
  Vec3 derivative(double s) const { return series_.jet(wrap_unit(s), 1).d1; }

  /// max|f| + max|f'| over a uniform grid of `grid` points.
  double c1_norm(int grid = 4096) const {
    double fmax = 0.0, dmax = 0.0;
    for (int j = 0; j < grid; ++j) {
      const Jet3 jt = series_.jet(static_cast<double>(j) / grid, 1);
      fmax = std::max(fmax, jt.d0.norm());
      dmax = std::max(dmax, jt.d1.norm());
    }
    return fmax + dmax;
  }

  bool is_zero() const { return series_.scale() == 0.0; }

  std::vector<FourierMode> modes() const { return series_.modes(); }

 private:
  FourierSeries3 series_;
};

}  // namespace sbt
