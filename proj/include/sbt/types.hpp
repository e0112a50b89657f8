#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace sbt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Derivative of a 3x3 matrix field: grad[k](i, j) = d/dx_k M_ij.
using Grad3 = std::array<Mat3, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an arclength onto [0, 1).
inline double wrap_unit(double s) {
  double w = s - std::floor(s);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace sbt
