#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "slender_body.hpp"
#include "types.hpp"

namespace sbt {

/// Trapezoid mean over a uniform theta grid.
inline Vec3 theta_average(std::span<const Vec3> values) {
  if (values.size() < 16) throw ConfigInvalid("theta_average needs n_theta >= 16");
  Vec3 acc = Vec3::Zero();
  for (const Vec3& v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

inline double theta_node(int j, int n_theta) { return kTwoPi * j / n_theta; }

struct VelocityResidual {
  std::vector<Vec3> residual;  // u^r(theta_j) = u(theta_j) - theta average
  double ur_max = 0.0;         // max_j |u^r(theta_j)|
};

inline VelocityResidual velocity_residual_from(std::span<const Vec3> surface_velocities) {
  const Vec3 mean = theta_average(surface_velocities);
  VelocityResidual out;
  out.residual.reserve(surface_velocities.size());
  for (const Vec3& u : surface_velocities) {
    out.residual.push_back(u - mean);
    out.ur_max = std::max(out.ur_max, out.residual.back().norm());
  }
  return out;
}

/// theta dependence of the surface velocity on the cross section at s.
inline VelocityResidual velocity_residual(const SlenderBody& body, double s, int n_theta) {
  std::vector<Vec3> u(n_theta);
  for (int j = 0; j < n_theta; ++j) u[j] = body.surface_velocity(s, theta_node(j, n_theta));
  return velocity_residual_from(u);
}

/// Cross-sectional force split by how the traction sigma n (n = -e_rho) is
/// assembled: pressure part, the (grad u) n part, and the three frame
/// projections of the (grad u)^T n part.
struct ForceComponents {
  Vec3 pressure = Vec3::Zero();
  Vec3 f1 = Vec3::Zero();
  Vec3 f2 = Vec3::Zero();
  Vec3 f3 = Vec3::Zero();
  Vec3 f4 = Vec3::Zero();

  Vec3 sum() const { return pressure + f1 + f2 + f3 + f4; }
  std::array<Vec3, 5> as_array() const { return {pressure, f1, f2, f3, f4}; }
};

/// Surface geometry of one node of the theta grid.
struct SectionNode {
  Vec3 point;
  Vec3 e_rho;
  Vec3 e_theta;
  Vec3 e_t;
  double weight = 0.0;  // (2 pi / n_theta) J_eps
};

inline std::vector<SectionNode> section_nodes(const Frame& fr, double eps, double s, int n_theta) {
  fr.check_epsilon(eps);
  const CurvePoint p = fr.centerline().point(s);
  const Triad tri = fr.triad_at(p, s);
  const double k1 = p.xss.dot(tri.n1), k2 = p.xss.dot(tri.n2);
  std::vector<SectionNode> nodes(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const double th = theta_node(j, n_theta);
    const double c = std::cos(th), sn = std::sin(th);
    SectionNode& nd = nodes[j];
    nd.e_rho = c * tri.n1 + sn * tri.n2;
    nd.e_theta = -sn * tri.n1 + c * tri.n2;
    nd.e_t = tri.t;
    nd.point = p.x + eps * nd.e_rho;
    nd.weight = (kTwoPi / n_theta) * eps * (1.0 - eps * (k1 * c + k2 * sn));
  }
  return nodes;
}

inline ForceComponents force_components_from(std::span<const SectionNode> nodes,
                                             std::span<const FieldSample> samples) {
  ForceComponents out;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const SectionNode& nd = nodes[j];
    const Mat3& g = samples[j].velocity_gradient;
    const double w = nd.weight;
    const Vec3 gt_rho = g.transpose() * nd.e_rho;
    out.pressure += (w * samples[j].pressure) * nd.e_rho;
    out.f1 -= w * (g * nd.e_rho);
    out.f2 -= (w * gt_rho.dot(nd.e_rho)) * nd.e_rho;
    out.f3 -= (w * gt_rho.dot(nd.e_theta)) * nd.e_theta;
    out.f4 -= (w * gt_rho.dot(nd.e_t)) * nd.e_t;
  }
  return out;
}

/// f^SB(s) = int_0^{2 pi} sigma n J_eps dtheta, assembled directly from the
/// Cartesian stress.
inline Vec3 force_sbt_from(std::span<const SectionNode> nodes, std::span<const FieldSample> samples) {
  Vec3 out = Vec3::Zero();
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out += nodes[j].weight * (stress_from(samples[j]) * (-nodes[j].e_rho));
  return out;
}

inline std::vector<FieldSample> section_samples(const SlenderBody& body, std::span<const SectionNode> nodes) {
  std::vector<FieldSample> out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) out[j] = body.field_sample(nodes[j].point);
  return out;
}

inline void check_n_theta(int n_theta) {
  if (n_theta < 32) throw ConfigInvalid("force integrals need n_theta >= 32");
}

inline Vec3 force_sbt(const SlenderBody& body, double s, int n_theta) {
  check_n_theta(n_theta);
  const auto nodes = section_nodes(body.frame(), body.epsilon(), s, n_theta);
  return force_sbt_from(nodes, section_samples(body, nodes));
}

inline ForceComponents force_components(const SlenderBody& body, double s, int n_theta) {
  check_n_theta(n_theta);
  const auto nodes = section_nodes(body.frame(), body.epsilon(), s, n_theta);
  return force_components_from(nodes, section_samples(body, nodes));
}

/// Limits of the pressure and f1 components as eps -> 0.
struct ComponentLimits {
  Vec3 pressure;  // (f.e_n1 e_n1 + f.e_n2 e_n2) / 2
  Vec3 f1;        // (f + f.e_t e_t) / 2
};

inline ComponentLimits component_limits(const Frame& fr, const Vec3& f, double s) {
  const Triad tri = fr.triad(s);
  return {0.5 * (f.dot(tri.n1) * tri.n1 + f.dot(tri.n2) * tri.n2), 0.5 * (f + f.dot(tri.t) * tri.t)};
}

/// u(s, theta) on the surface minus the Keller-Rubinow centerline velocity.
inline Vec3 centerline_residual(const SlenderBody& body, double s, double theta) {
  return body.surface_velocity(s, theta) - body.centerline_velocity_kr(s);
}

struct CrossSectionReport {
  double s = 0.0;
  Vec3 f_sb = Vec3::Zero();
  Vec3 f_true = Vec3::Zero();
  ForceComponents components;
  double ur_max = 0.0;
  int n_theta = 0;
  Vec3 u_centerline = Vec3::Zero();
  double centerline_residual_max = 0.0;  // max_theta |u(s, theta) - u_C(s)|
  double closure = 0.0;                  // |sum of components - f_sb|

  double force_residual() const { return (f_sb - f_true).norm(); }
};

/// All per-cross-section diagnostics from one set of surface field samples.
inline CrossSectionReport cross_section(const SlenderBody& body, double s, int n_theta) {
  check_n_theta(n_theta);
  const auto nodes = section_nodes(body.frame(), body.epsilon(), s, n_theta);
  const auto samples = section_samples(body, nodes);
  CrossSectionReport rep;
  rep.s = s;
  rep.n_theta = n_theta;
  rep.f_true = body.force().value(s);
  rep.f_sb = force_sbt_from(nodes, samples);
  rep.components = force_components_from(nodes, samples);
  rep.closure = (rep.components.sum() - rep.f_sb).norm();
  std::vector<Vec3> u(n_theta);
  for (int j = 0; j < n_theta; ++j) u[j] = samples[j].velocity;
  rep.ur_max = velocity_residual_from(u).ur_max;
  rep.u_centerline = body.centerline_velocity_kr(s);
  for (const Vec3& uj : u) rep.centerline_residual_max = std::max(rep.centerline_residual_max, (uj - rep.u_centerline).norm());
  return rep;
}

/// Cross sections at s_j = j / n_s, evaluated in parallel.
inline std::vector<CrossSectionReport> cross_sections(const SlenderBody& body, int n_s, int n_theta,
                                                      int threads = thread_count()) {
  if (n_s < 1) throw ConfigInvalid("n_s must be positive");
  std::vector<CrossSectionReport> out(n_s);
  parallel_for(static_cast<std::size_t>(n_s),
               [&](std::size_t j) { out[j] = cross_section(body, static_cast<double>(j) / n_s, n_theta); }, threads);
  return out;
}

}  // namespace sbt
