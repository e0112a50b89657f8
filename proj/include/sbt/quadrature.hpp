#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace sbt {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order() const { return static_cast<int>(nodes.size()); }
};

inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Per-panel rule used by every graded composite quadrature in the library.
inline constexpr int kPanelOrder = 16;

inline const GaussRule& panel_rule() {
  static const GaussRule rule = gauss_legendre(kPanelOrder);
  return rule;
}

/// Knobs for the near-singular line quadrature.
struct QuadratureSpec {
  int base_nodes = 256;                 // periodic trapezoid nodes for far-field points
  double near_window = 0.125;           // half-width of the geometrically graded window
  int near_refinement_levels = 5;       // maximum number of panel halvings
  double target_rel_tol = 1e-10;

  /// Default spec for fiber radius eps: base_nodes = max(256, ceil(8/eps)),
  /// window = min(1/8, 64 eps).
  static QuadratureSpec for_epsilon(double eps, double tol = 1e-10) {
    if (!(eps > 0.0)) throw ConfigInvalid("epsilon must be positive");
    QuadratureSpec q;
    q.base_nodes = std::max(256, static_cast<int>(std::ceil(8.0 / eps)));
    q.near_window = std::min(0.125, 64.0 * eps);
    q.target_rel_tol = tol;
    return q;
  }

  void validate() const {
    if (base_nodes < 64) throw ConfigInvalid("quadrature base_nodes must be >= 64");
    if (!(near_window > 0.0 && near_window <= 0.25))
      throw ConfigInvalid("quadrature near_window must lie in (0, 1/4]");
    if (near_refinement_levels < 1) throw ConfigInvalid("near_refinement_levels must be >= 1");
    if (!(target_rel_tol > 0.0 && target_rel_tol <= 1e-3))
      throw ConfigInvalid("target_rel_tol must lie in (0, 1e-3]");
  }
};

namespace detail {

template <class V>
V zero_value() {
  if constexpr (std::is_arithmetic_v<V>) {
    return V(0);
  } else {
    return V::Zero();
  }
}

inline double abs_value(double v) { return std::abs(v); }

template <class Derived>
auto abs_value(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().eval();
}

/// Worst component-wise |diff| / scale, where scale is the integral of |f|.
inline double relative_gap(double diff, double scale, double abs_floor = 0.0) {
  const double d = std::abs(diff);
  scale = std::max(scale, abs_floor);
  if (d == 0.0) return 0.0;
  return scale > 0.0 ? d / scale : INFINITY;
}

/// Components whose scale is below 1e-12 of the largest one (round-off
/// level integrands) are measured against that floor instead.
template <class Derived>
double relative_gap(const Eigen::MatrixBase<Derived>& diff, const Eigen::MatrixBase<Derived>& scale,
                    double abs_floor = 0.0) {
  const double floor = std::max(abs_floor, 1e-12 * scale.maxCoeff());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i)
    worst = std::max(worst, relative_gap(diff(i), std::max(scale(i), floor)));
  return worst;
}

}  // namespace detail

/// Integral and integral-of-absolute-value from one composite Gauss pass.
template <class V>
struct CompositeSum {
  V value;
  V abs_value;
  int nodes = 0;
};

/// Composite Gauss rule over the panels [breaks[i], breaks[i+1]], each split
/// into `split` equal subpanels. Summation order is fixed.
template <class F>
auto composite_gauss(F&& f, std::span<const double> breaks, int split, const GaussRule& rule) {
  using V = std::decay_t<decltype(f(0.0))>;
  CompositeSum<V> out{detail::zero_value<V>(), detail::zero_value<V>(), 0};
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    const double h = (b - a) / split;
    for (int q = 0; q < split; ++q) {
      const double lo = a + q * h;
      const double half = 0.5 * h;
      const double mid = lo + half;
      for (int i = 0; i < rule.order(); ++i) {
        const V v = f(mid + half * rule.nodes[i]);
        const double w = half * rule.weights[i];
        out.value += w * v;
        out.abs_value += w * detail::abs_value(v);
      }
      out.nodes += rule.order();
    }
  }
  return out;
}

/// Trapezoid rule on the nodes {j / n}; spectrally accurate for smooth
/// 1-periodic integrands.
template <class F>
auto periodic_trapezoid(F&& f, int n) {
  using V = std::decay_t<decltype(f(0.0))>;
  if (n < 1) throw std::invalid_argument("periodic_trapezoid needs n >= 1");
  V acc = detail::zero_value<V>();
  for (int j = 0; j < n; ++j) acc += f(static_cast<double>(j) / n);
  return V(acc / static_cast<double>(n));
}

/// Panel breakpoints on [-1/2, 1/2] graded geometrically (ratio 2) toward 0,
/// from a central panel of width peak_scale/4 out to `window`, then uniform
/// panels no wider than `window`.
inline std::vector<double> graded_breakpoints(double peak_scale, double window) {
  window = std::min(window, 0.25);
  std::vector<double> pos;
  double b = peak_scale / 8.0;
  if (b >= 0.5 * window) {
    pos.push_back(0.5 * window);
  } else {
    pos.push_back(b);
    while (2.0 * pos.back() < window) pos.push_back(2.0 * pos.back());
    if (pos.back() < window) {
      if (window - pos.back() < 0.25 * pos.back()) pos.back() = window;
      else pos.push_back(window);
    }
  }
  while (pos.back() + window < 0.5) pos.push_back(pos.back() + window);
  if (0.5 - pos.back() < 0.25 * window && pos.size() > 1) pos.back() = 0.5;
  else pos.push_back(0.5);

  std::vector<double> breaks;
  breaks.reserve(2 * pos.size());
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) breaks.push_back(-*it);
  for (double p : pos) breaks.push_back(p);
  return breaks;
}

template <class V>
struct QuadratureResult {
  V value;
  double rel_error = 0.0;  // component-wise gap between the two finest levels
  int level = 0;           // number of panel halvings used
  int nodes = 0;           // total integrand evaluations
};

/// Composite Gauss over `breaks`, halving every panel per level until two
/// successive levels agree to target_rel_tol (relative to the integral of
/// |f|, component-wise). Throws ToleranceNotMet when the finest pair still
/// differs by more than 10x the tolerance. `abs_floor` bounds the scale from
/// below for integrands that cancel to round-off.
template <class F>
auto refined_composite_quad(F&& f, std::span<const double> breaks, const QuadratureSpec& spec,
                            double abs_floor = 0.0) {
  using V = std::decay_t<decltype(f(0.0))>;
  const auto& rule = panel_rule();
  QuadratureResult<V> result{detail::zero_value<V>(), 0.0, 0, 0};
  auto coarse = composite_gauss(f, breaks, 1, rule);
  result.nodes = coarse.nodes;
  double gap = INFINITY;
  for (int level = 1; level <= spec.near_refinement_levels; ++level) {
    auto fine = composite_gauss(f, breaks, 1 << level, rule);
    result.nodes += fine.nodes;
    gap = detail::relative_gap(V(fine.value - coarse.value), fine.abs_value, abs_floor);
    result.value = fine.value;
    result.rel_error = gap;
    result.level = level;
    if (gap <= spec.target_rel_tol) return result;
    coarse = std::move(fine);
  }
  if (gap > 10.0 * spec.target_rel_tol)
    throw ToleranceNotMet("composite quadrature did not converge: relative gap " + std::to_string(gap) +
                          " after " + std::to_string(spec.near_refinement_levels) + " refinements");
  return result;
}

/// Integrates f(sbar) over [-1/2, 1/2] when f is smooth but peaked with
/// width ~peak_scale around sbar = 0, on graded panels.
template <class F>
auto near_singular_line_quad(F&& f, double peak_scale, const QuadratureSpec& spec) {
  if (!(peak_scale > 0.0 && peak_scale < 0.125))
    throw std::invalid_argument("near_singular_line_quad: peak_scale must lie in (0, 1/8)");
  const auto breaks = graded_breakpoints(peak_scale, spec.near_window);
  return refined_composite_quad(std::forward<F>(f), breaks, spec);
}

/// d_mn = int_R tau^m / (tau^2 + 1)^(n/2) dtau for even m >= 0, n >= m + 3,
/// computed after tau = tan(phi) as int sin^m cos^(n-2-m) over (-pi/2, pi/2).
inline double dmn_integral(int m, int n) {
  if (m < 0 || m % 2 != 0) throw std::invalid_argument("dmn_integral: m must be even and >= 0");
  if (n < m + 3) throw std::invalid_argument("dmn_integral: n must be >= m + 3");
  static const GaussRule rule = gauss_legendre(48);
  const int cos_power = n - 2 - m;
  double total = 0.0;
  // Two panels so the endpoint behaviour of odd cosine powers is resolved
  // from both sides.
  for (int side = 0; side < 2; ++side) {
    const double lo = side == 0 ? -0.5 * kPi : 0.0;
    const double half = 0.25 * kPi;
    for (int i = 0; i < rule.order(); ++i) {
      const double phi = lo + half + half * rule.nodes[i];
      total += half * rule.weights[i] * std::pow(std::sin(phi), m) * std::pow(std::cos(phi), cos_power);
    }
  }
  return total;
}

}  // namespace sbt
