#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fourier.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace sbt {

/// Position, unit tangent and second derivative of the centerline at one s.
struct CurvePoint {
  Vec3 x;
  Vec3 tangent;
  Vec3 xss;  // d^2 X / ds^2, orthogonal to the tangent
};

/// Closed C^2 fiber centerline, parameterized by arclength on T = R/Z and
/// normalized to unit length.
///
/// Construction goes through the raw Fourier parameter phi: the cumulative
/// arclength s(phi) is tabulated by composite Gauss quadrature, inverted with
/// cubic Hermite interpolation plus Newton polishing, and the resulting
/// arclength-parameterized curve is resampled into a Fourier series in s. All
/// queries after construction use that series.
class Centerline {
 public:
  static constexpr int kMinSamples = 64;

  static Centerline build(std::span<const FourierMode> raw_modes, int samples = 256) {
    if (samples < kMinSamples) throw ConfigInvalid("centerline samples must be >= 64");
    if (raw_modes.empty()) throw DegenerateCurve("centerline has no Fourier modes");
    Centerline c;
    c.samples_ = samples;
    c.raw_ = FourierSeries3(raw_modes);
    c.tabulate_arclength(std::max(4 * samples, 1024));
    if (!(c.raw_length_ >= 1e-12)) throw DegenerateCurve("total curve length below 1e-12");
    c.raw_ = c.raw_.scaled(1.0 / c.raw_length_);
    c.resample_in_arclength();
    c.estimate_kappa_max();
    c.estimate_c_gamma();
    if (c.c_gamma_ < 1e-6)
      throw SelfIntersection("non-self-intersection constant c_Gamma ~ " + std::to_string(c.c_gamma_));
    return c;
  }

  /// order 0: X(s); 1: unit tangent; 2: X''(s). s is wrapped onto [0, 1).
  Vec3 eval(double s, int order) const {
    const CurvePoint p = point(s);
    switch (order) {
      case 0: return p.x;
      case 1: return p.tangent;
      case 2: return p.xss;
      default: throw std::invalid_argument("eval_curve order must be 0, 1 or 2");
    }
  }

  CurvePoint point(double s) const {
    const Jet3 j = series_.jet(wrap_unit(s), 2);
    CurvePoint p;
    p.x = j.d0;
    p.tangent = j.d1.normalized();
    p.xss = j.d2 - j.d2.dot(p.tangent) * p.tangent;
    return p;
  }

  Vec3 position(double s) const { return series_.jet(wrap_unit(s), 0).d0; }

  double curvature(double s) const { return point(s).xss.norm(); }

  /// Fourier modes of X(s) in arclength. Feeding them back into build() is
  /// the identity.
  std::vector<FourierMode> fourier_modes() const { return series_.modes(); }

  /// The input modes rescaled to unit length (still in the raw parameter).
  std::vector<FourierMode> raw_modes() const { return raw_.modes(); }

  double total_length() const { return 1.0; }
  double raw_length() const { return raw_length_; }
  int sample_count() const { return samples_; }
  double c_gamma() const { return c_gamma_; }
  double kappa_max() const { return kappa_max_; }
  int series_wavenumbers() const { return series_.max_wavenumber(); }

  /// Arclength of raw parameter phi in [0, 1].
  double arclength_of(double phi) const {
    const double cells = static_cast<double>(table_s_.size() - 1);
    const double pos = std::clamp(phi, 0.0, 1.0) * cells;
    const auto j = std::min(static_cast<std::size_t>(pos), table_s_.size() - 2);
    return table_s_[j] + partial_length(static_cast<double>(j) / cells, phi);
  }

  /// Raw parameter phi with arclength_of(phi) = s, for s in [0, 1].
  double raw_parameter(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const std::size_t cells = table_s_.size() - 1;
    auto it = std::upper_bound(table_s_.begin(), table_s_.end(), s);
    std::size_t j = it == table_s_.begin() ? 0 : static_cast<std::size_t>(it - table_s_.begin()) - 1;
    j = std::min(j, cells - 1);
    const double h = 1.0 / static_cast<double>(cells);
    const double s0 = table_s_[j], s1 = table_s_[j + 1];
    const double ds = s1 - s0;
    const double phi0 = j * h, phi1 = (j + 1) * h;
    // Cubic Hermite for the inverse map phi(s); d phi / ds = 1 / speed.
    const double d0 = 1.0 / table_speed_[j], d1 = 1.0 / table_speed_[j + 1];
    const double u = ds > 0 ? (s - s0) / ds : 0.0;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    double phi = h00 * phi0 + h10 * ds * d0 + h01 * phi1 + h11 * ds * d1;
    for (int iter = 0; iter < 4; ++iter) {
      const double residual = s0 + partial_length(phi0, phi) - s;
      const double step = residual / speed(phi);
      phi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return phi;
  }

  /// Uniform samples X(j / N) used to seed closest-point searches.
  std::span<const Vec3> search_samples() const { return search_samples_; }

  struct Closest {
    double s = 0.0;
    double distance = 0.0;
  };

  /// Closest centerline point to x: coarse scan of the stored samples, then
  /// Newton on |x - X(s)|^2.
  Closest closest_point(const Vec3& x) const {
    const std::size_t n = search_samples_.size();
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = (x - search_samples_[j]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    const double h = 1.0 / static_cast<double>(n);
    double s = best * h;
    for (int iter = 0; iter < 30; ++iter) {
      const CurvePoint p = point(s);
      const Vec3 r = x - p.x;
      const double g1 = -r.dot(p.tangent);
      const double g2 = 1.0 - r.dot(p.xss);
      double step = g2 > 0.0 ? -g1 / g2 : (g1 > 0.0 ? -h : h);
      step = std::clamp(step, -h, h);
      s += step;
      if (std::abs(step) < 1e-15) break;
    }
    s = wrap_unit(s);
    return {s, (x - position(s)).norm()};
  }

 private:
  double speed(double phi) const { return raw_.jet(phi, 1).d1.norm(); }

  /// Arclength of the raw curve between phi_a and phi_b (short intervals).
  double partial_length(double phi_a, double phi_b) const {
    static const GaussRule rule = gauss_legendre(8);
    const double half = 0.5 * (phi_b - phi_a), mid = 0.5 * (phi_a + phi_b);
    double acc = 0.0;
    for (int i = 0; i < rule.order(); ++i) acc += rule.weights[i] * speed(mid + half * rule.nodes[i]);
    return half * acc;
  }

  void tabulate_arclength(int cells) {
    table_s_.assign(cells + 1, 0.0);
    for (int j = 0; j < cells; ++j)
      table_s_[j + 1] = table_s_[j] + partial_length(static_cast<double>(j) / cells,
                                                     static_cast<double>(j + 1) / cells);
    raw_length_ = table_s_.back();
    if (!(raw_length_ >= 1e-12)) return;
    for (double& v : table_s_) v /= raw_length_;
    table_s_.back() = 1.0;
    table_speed_.resize(cells + 1);
    double min_speed = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= cells; ++j) {
      table_speed_[j] = speed(static_cast<double>(j) / cells) / raw_length_;
      min_speed = std::min(min_speed, table_speed_[j]);
    }
    if (min_speed < 1e-9) throw DegenerateCurve("raw parameterization has (near) zero speed");
  }

  void resample_in_arclength() {
    // The arclength series must resolve the reparameterized curve to
    // round-off; keep doubling until the top eighth of the spectrum is empty.
    for (int n = std::max(samples_, 256);; n *= 2) {
      std::vector<Vec3> samples(n);
      for (int j = 0; j < n; ++j) samples[j] = raw_.value(raw_parameter(static_cast<double>(j) / n));
      series_ = FourierSeries3::interpolate(samples, 0.0);
      const double tail = series_.tail_magnitude(static_cast<std::size_t>(3 * n / 8));
      if (tail <= 1e-15 * series_.scale() || n >= 16384) {
        series_ = FourierSeries3::interpolate(samples, 2e-15);
        break;
      }
    }
    const int m = 1024;
    search_samples_.resize(m);
    for (int j = 0; j < m; ++j) search_samples_[j] = position(static_cast<double>(j) / m);
  }

  void estimate_kappa_max() {
    const int n = 4096;
    int best = 0;
    double best_k = -1.0;
    for (int j = 0; j < n; ++j) {
      const double k = curvature(static_cast<double>(j) / n);
      if (k > best_k) {
        best_k = k;
        best = j;
      }
    }
    // Golden-section refinement around the best sample.
    double a = (best - 1.0) / n, b = (best + 1.0) / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = curvature(c), fd = curvature(d);
    for (int iter = 0; iter < 60; ++iter) {
      if (fc > fd) {
        b = d; d = c; fd = fc; c = b - g * (b - a); fc = curvature(c);
      } else {
        a = c; c = d; fc = fd; d = a + g * (b - a); fd = curvature(d);
      }
    }
    kappa_max_ = std::max({best_k, fc, fd});
  }

  double chord_ratio(double s, double t) const {
    double d = std::abs(wrap_unit(s) - wrap_unit(t));
    d = std::min(d, 1.0 - d);
    if (d < 1e-12) return 1.0;
    return (position(s) - position(t)).norm() / d;
  }

  /// c_Gamma = inf |X(s) - X(t)| / d_T(s, t): brute force on a 2048 grid,
  /// then a shrinking pattern search around the best pair.
  void estimate_c_gamma() {
    const int n = 2048;
    std::vector<Vec3> pts(n);
    for (int j = 0; j < n; ++j) pts[j] = position(static_cast<double>(j) / n);
    double best = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 1;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int gap = std::min(j - i, n - (j - i));
        const double r = (pts[i] - pts[j]).norm() / (static_cast<double>(gap) / n);
        if (r < best) {
          best = r;
          bi = i;
          bj = j;
        }
      }
    }
    double s = static_cast<double>(bi) / n, t = static_cast<double>(bj) / n;
    double step = 1.0 / n;
    double f = chord_ratio(s, t);
    while (step > 1e-11) {
      bool moved = false;
      for (const auto& [ds, dt] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}) {
        const double cand = chord_ratio(s + ds * step, t + dt * step);
        if (cand < f) {
          f = cand;
          s += ds * step;
          t += dt * step;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    c_gamma_ = std::min(best, f);
  }

  int samples_ = 0;
  FourierSeries3 raw_;
  FourierSeries3 series_;
  double raw_length_ = 0.0;
  std::vector<double> table_s_;      // normalized arclength at phi_j = j / cells
  std::vector<double> table_speed_;  // ds/dphi at phi_j
  std::vector<Vec3> search_samples_;
  double c_gamma_ = 0.0;
  double kappa_max_ = 0.0;
};

/// Orthonormal triad (e_t, e_n1, e_n2) with e_n2 = e_t x e_n1.
struct Triad {
  Vec3 t;
  Vec3 n1;
  Vec3 n2;
};

/// Periodic orthonormal frame along the centerline whose twist coefficient
/// kappa3 is constant with |kappa3| <= pi.
///
/// A twist-free (parallel-transport) frame is integrated with RK4 and
/// re-orthonormalized every step. Going once around the loop rotates the
/// transported normal by the holonomy angle alpha; rotating the frame at the
/// constant rate kappa3 = -alpha (mod 2 pi, reduced into (-pi, pi]) closes it.
class Frame {
 public:
  static constexpr int kMinSamples = 128;

  static Frame build(const Centerline& c, int samples = 1024) {
    if (samples < kMinSamples) throw ConfigInvalid("frame samples must be >= 128");
    Frame fr;
    fr.curve_ = c;
    fr.n_ = samples;
    const int substeps = std::max(16, (65536 + samples - 1) / samples);
    const double h = 1.0 / (static_cast<double>(samples) * substeps);

    auto rhs = [&c](double s, const Vec3& b) -> Vec3 {
      const CurvePoint p = c.point(s);
      return -p.xss.dot(b) * p.tangent;
    };

    const CurvePoint p0 = c.point(0.0);
    Vec3 b = initial_normal(p0);
    std::vector<Vec3> transported(samples);
    for (int j = 0; j < samples; ++j) {
      transported[j] = b;
      for (int k = 0; k < substeps; ++k) {
        const double s = (static_cast<double>(j) * substeps + k) * h;
        const Vec3 k1 = rhs(s, b);
        const Vec3 k2 = rhs(s + 0.5 * h, b + 0.5 * h * k1);
        const Vec3 k3 = rhs(s + 0.5 * h, b + 0.5 * h * k2);
        const Vec3 k4 = rhs(s + h, b + h * k3);
        b += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Vec3 t = c.eval(s + h, 1);
        const double drift = std::max(std::abs(b.dot(t)), std::abs(b.norm() - 1.0));
        if (drift > 1e-8)
          throw IntegrationFailure("frame transport lost orthonormality (drift " + std::to_string(drift) + ")");
        b = (b - b.dot(t) * t).normalized();
      }
    }

    const Vec3 b1_0 = transported[0];
    const Vec3 b2_0 = p0.tangent.cross(b1_0);
    fr.holonomy_ = std::atan2(b.dot(b2_0), b.dot(b1_0));
    fr.kappa3_ = reduce_twist(-fr.holonomy_);

    fr.samples_.resize(samples);
    fr.kappa1_.resize(samples);
    fr.kappa2_.resize(samples);
    std::vector<Vec3> n1_samples(samples);
    for (int j = 0; j < samples; ++j) {
      const double s = static_cast<double>(j) / samples;
      const CurvePoint p = c.point(s);
      const Vec3 b1 = transported[j];
      const Vec3 b2 = p.tangent.cross(b1);
      const double psi = fr.kappa3_ * s;
      Triad tri;
      tri.t = p.tangent;
      tri.n1 = std::cos(psi) * b1 + std::sin(psi) * b2;
      tri.n2 = tri.t.cross(tri.n1);
      fr.samples_[j] = tri;
      fr.kappa1_[j] = p.xss.dot(tri.n1);
      fr.kappa2_[j] = p.xss.dot(tri.n2);
      n1_samples[j] = tri.n1;
    }
    fr.n1_series_ = FourierSeries3::interpolate(n1_samples, 2e-15);
    fr.kappa_max_ = c.kappa_max();
    fr.r_max_ = std::min(1.0 / (2.0 * fr.kappa_max_), c.c_gamma() / 4.0);
    return fr;
  }

  Triad triad(double s) const {
    const CurvePoint p = curve_.point(s);
    return triad_at(p, s);
  }

  /// Triad at s when the curve point is already known.
  Triad triad_at(const CurvePoint& p, double s) const {
    Triad tri;
    tri.t = p.tangent;
    const Vec3 raw = n1_series_.value(wrap_unit(s));
    tri.n1 = (raw - raw.dot(tri.t) * tri.t).normalized();
    tri.n2 = tri.t.cross(tri.n1);
    return tri;
  }

  double kappa1(double s) const {
    const CurvePoint p = curve_.point(s);
    return p.xss.dot(triad_at(p, s).n1);
  }

  double kappa2(double s) const {
    const CurvePoint p = curve_.point(s);
    return p.xss.dot(triad_at(p, s).n2);
  }

  /// d e_n1/ds . e_n2 from the interpolant; equals kappa3 at the samples.
  double twist_rate(double s) const {
    const Triad tri = triad(s);
    return n1_series_.jet(wrap_unit(s), 1).d1.dot(tri.n2);
  }

  double kappa3() const { return kappa3_; }
  double kappa_max() const { return kappa_max_; }
  double r_max() const { return r_max_; }
  double holonomy() const { return holonomy_; }
  double max_admissible_epsilon() const { return r_max_ / 4.0; }

  int sample_count() const { return n_; }
  std::span<const Triad> samples() const { return samples_; }
  std::span<const double> kappa1_samples() const { return kappa1_; }
  std::span<const double> kappa2_samples() const { return kappa2_; }
  const Centerline& centerline() const { return curve_; }

  Vec3 e_rho(double s, double theta) const {
    const Triad tri = triad(s);
    return std::cos(theta) * tri.n1 + std::sin(theta) * tri.n2;
  }

  Vec3 e_theta(double s, double theta) const {
    const Triad tri = triad(s);
    return -std::sin(theta) * tri.n1 + std::cos(theta) * tri.n2;
  }

  /// Throws EpsilonTooLarge unless 0 < eps < r_max / 4.
  void check_epsilon(double eps) const {
    if (!(eps > 0.0)) throw EpsilonTooLarge("fiber radius must be positive");
    if (eps >= max_admissible_epsilon())
      throw EpsilonTooLarge("fiber radius " + std::to_string(eps) + " >= r_max/4 = " +
                            std::to_string(max_admissible_epsilon()));
  }

  /// kappa3 reduced into (-pi, pi]; an exact -pi maps to +pi.
  static double reduce_twist(double k3) {
    double r = std::remainder(k3, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    if (r > kPi) r -= kTwoPi;
    return r == 0.0 ? 0.0 : r;
  }

 private:
  static Vec3 initial_normal(const CurvePoint& p) {
    Vec3 ref = p.xss;
    if (ref.norm() < 1e-8) {
      Eigen::Index axis = 0;
      p.tangent.cwiseAbs().minCoeff(&axis);
      ref = Vec3::Unit(axis);
    }
    return (ref - ref.dot(p.tangent) * p.tangent).normalized();
  }

  Centerline curve_;
  int n_ = 0;
  std::vector<Triad> samples_;
  std::vector<double> kappa1_;
  std::vector<double> kappa2_;
  FourierSeries3 n1_series_;
  double kappa3_ = 0.0;
  double holonomy_ = 0.0;
  double kappa_max_ = 0.0;
  double r_max_ = 0.0;
};

/// Point on the fiber surface and the unit normal pointing into the fiber.
struct SurfacePoint {
  Vec3 point;
  Vec3 inward_normal;
};

/// Gamma_eps(s, theta) = X(s) + eps e_rho(s, theta); normal n = -e_rho.
inline SurfacePoint surface_point(const Frame& fr, double eps, double s, double theta) {
  fr.check_epsilon(eps);
  const CurvePoint p = fr.centerline().point(s);
  const Triad tri = fr.triad_at(p, s);
  const Vec3 e_rho = std::cos(theta) * tri.n1 + std::sin(theta) * tri.n2;
  return {p.x + eps * e_rho, -e_rho};
}

/// Surface area element J_eps = eps (1 - eps (kappa1 cos theta + kappa2 sin theta)).
inline double jacobian(const Frame& fr, double eps, double s, double theta) {
  fr.check_epsilon(eps);
  const double khat = fr.kappa1(s) * std::cos(theta) + fr.kappa2(s) * std::sin(theta);
  return eps * (1.0 - eps * khat);
}

}  // namespace sbt
