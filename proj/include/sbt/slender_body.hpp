#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "force.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace sbt {

/// Velocity, pressure and velocity gradient grad(i, k) = d u_i / d x_k of the
/// slender-body fields at one point. Viscosity is 1.
struct FieldSample {
  Vec3 velocity = Vec3::Zero();
  double pressure = 0.0;
  Mat3 velocity_gradient = Mat3::Zero();
};

/// sigma = grad u + grad u^T - p I.
inline Mat3 stress_from(const FieldSample& fs) {
  return fs.velocity_gradient + fs.velocity_gradient.transpose() - fs.pressure * Mat3::Identity();
}

/// Diagnostics of the last field evaluation path taken.
struct FieldQuadratureInfo {
  bool near = false;
  double closest_s = 0.0;
  double distance = 0.0;
  int nodes = 0;
  int level = 0;
  double rel_error = 0.0;
};

/// Local part of the Keller-Rubinow operator:
/// [(I - 3 e_t e_t^T) - 2 (I + e_t e_t^T) log(pi eps / 4)] f.
inline Vec3 kr_local_term(const Vec3& e_t, const Vec3& f, double eps) {
  const Mat3 tt = e_t * e_t.transpose();
  const Mat3 op = (Mat3::Identity() - 3.0 * tt) - 2.0 * (Mat3::Identity() + tt) * std::log(kPi * eps / 4.0);
  return op * f;
}

/// A closed fiber of radius eps carrying the line force f, with the
/// quadrature used to evaluate its Stokeslet-plus-doublet line integrals:
///   8 pi u(x) = int_T (S(R) + eps^2/2 D(R)) f(t) dt,  R = x - X(t)
///   p(x)      = 1/(4 pi) int_T R.f(t)/|R|^3 dt
class SlenderBody {
 public:
  SlenderBody(Frame frame, ForceDensity force, double eps, QuadratureSpec spec)
      : frame_(std::move(frame)), force_(std::move(force)), eps_(eps), spec_(spec) {
    frame_.check_epsilon(eps_);
    spec_.validate();
  }

  /// Convenience: default quadrature for this radius.
  SlenderBody(Frame frame, ForceDensity force, double eps)
      : SlenderBody(std::move(frame), std::move(force), eps, QuadratureSpec::for_epsilon(eps)) {}

  const Frame& frame() const { return frame_; }
  const Centerline& centerline() const { return frame_.centerline(); }
  const ForceDensity& force() const { return force_; }
  double epsilon() const { return eps_; }
  const QuadratureSpec& spec() const { return spec_; }

  FieldSample field_sample(const Vec3& x, FieldQuadratureInfo* info = nullptr) const {
    const auto closest = centerline().closest_point(x);
    if (closest.distance < 0.5 * eps_)
      throw TooCloseToCenterline("evaluation point at distance " + std::to_string(closest.distance) +
                                 " < eps/2 from the centerline");
    const double c_d = 0.5 * eps_ * eps_;
    const Centerline& curve = centerline();
    const auto integrand = [&](double t) -> Packed {
      const Vec3 r = x - curve.position(t);
      const KernelApply k = apply_kernels(r, force_.value(t), c_d);
      Packed out;
      out.segment<3>(0) = k.velocity;
      out(3) = k.pressure;
      out.segment<9>(4) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(k.grad.data());
      return out;
    };

    Packed total;
    FieldQuadratureInfo local{false, closest.s, closest.distance, 0, 0, 0.0};
    if (closest.distance >= kFarDistance) {
      total = periodic_trapezoid(integrand, spec_.base_nodes);
      local.nodes = spec_.base_nodes;
    } else {
      const double s0 = closest.s;
      const auto res = near_singular_line_quad([&](double sbar) { return integrand(s0 + sbar); },
                                               closest.distance, spec_);
      total = res.value;
      local.near = true;
      local.nodes = res.nodes;
      local.level = res.level;
      local.rel_error = res.rel_error;
    }
    if (info) *info = local;

    FieldSample fs;
    fs.velocity = total.segment<3>(0) / (8.0 * kPi);
    fs.pressure = total(3) / (4.0 * kPi);
    fs.velocity_gradient = Eigen::Map<const Mat3>(total.data() + 4) / (8.0 * kPi);
    return fs;
  }

  Vec3 velocity(const Vec3& x) const { return field_sample(x).velocity; }
  double pressure(const Vec3& x) const { return field_sample(x).pressure; }
  Mat3 velocity_gradient(const Vec3& x) const { return field_sample(x).velocity_gradient; }
  Mat3 stress(const Vec3& x) const { return stress_from(field_sample(x)); }

  /// velocity(surface_point(s, theta)).
  Vec3 surface_velocity(double s, double theta) const {
    return velocity(surface_point(frame_, eps_, s, theta).point);
  }

  FieldSample surface_sample(double s, double theta) const {
    return field_sample(surface_point(frame_, eps_, s, theta).point);
  }

  /// Keller-Rubinow centerline velocity u_C(s):
  ///   8 pi u_C = local term
  ///            + int_T [S(X(s) - X(t)) f(t) - (I + e_t e_t^T) f(s) / |sin(pi (s - t)) / pi|] dt.
  /// The finite-part integrand is smooth on each side of t = s but has a
  /// jump there, so each half [-1/2, 0] and [0, 1/2] gets its own Gauss
  /// panels and the node t = s is never evaluated.
  Vec3 centerline_velocity_kr(double s, int panels_per_side = 8) const {
    const CurvePoint p = centerline().point(s);
    const Vec3 fs = force_.value(s);
    const Vec3 subtracted = (Mat3::Identity() + p.tangent * p.tangent.transpose()) * fs;
    const Centerline& curve = centerline();
    const auto integrand = [&](double sbar) -> Vec3 {
      const Vec3 r0 = p.x - curve.position(s + sbar);
      const Vec3 ft = force_.value(s + sbar);
      const double r = r0.norm();
      const Vec3 sf = ft / r + r0 * (r0.dot(ft) / (r * r * r));
      return sf - subtracted / std::abs(std::sin(kPi * sbar) / kPi);
    };
    std::vector<double> breaks(2 * panels_per_side + 1);
    for (int i = 0; i <= 2 * panels_per_side; ++i)
      breaks[i] = -0.5 + static_cast<double>(i) / (2 * panels_per_side);
    breaks[panels_per_side] = 0.0;
    const auto res = refined_composite_quad(integrand, breaks, spec_, subtracted.norm());
    return (kr_local_term(p.tangent, fs, eps_) + res.value) / (8.0 * kPi);
  }

  /// Distance beyond which the periodic trapezoid rule is used.
  static constexpr double kFarDistance = 0.125;

 private:
  using Packed = Eigen::Matrix<double, 13, 1>;

  Frame frame_;
  ForceDensity force_;
  double eps_;
  QuadratureSpec spec_;
};

}  // namespace sbt
