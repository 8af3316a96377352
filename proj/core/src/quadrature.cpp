#include "breather/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "breather/error.hpp"

namespace breather {

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw InvalidArgument("Gauss-Legendre rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breaks, std::size_t nodes_per_panel) {
  if (breaks.size() < 2) throw InvalidArgument("composite rule needs at least one panel");
  const QuadratureRule ref = gauss_legendre(nodes_per_panel);
  QuadratureRule rule;
  rule.nodes.reserve((breaks.size() - 1) * nodes_per_panel);
  rule.weights.reserve(rule.nodes.capacity());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    if (!(b > a)) throw InvalidArgument("panel breaks must be strictly increasing");
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t j = 0; j < nodes_per_panel; ++j) {
      rule.nodes.push_back(mid + half * ref.nodes[j]);
      rule.weights.push_back(half * ref.weights[j]);
    }
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                        std::size_t nodes_per_panel) {
  if (panels == 0) throw InvalidArgument("composite rule needs at least one panel");
  std::vector<double> breaks(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i)
    breaks[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(panels);
  return composite_gauss_legendre(breaks, nodes_per_panel);
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  std::vector<double> w(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (k != j) w[j] /= (nodes[j] - nodes[k]);
  return w;
}

PanelInterpolator::PanelInterpolator(std::span<const double> breaks, std::size_t nodes_per_panel)
    : breaks_(breaks.begin(), breaks.end()), per_panel_(nodes_per_panel) {
  nodes_ = composite_gauss_legendre(breaks, nodes_per_panel).nodes;
  const QuadratureRule ref = gauss_legendre(nodes_per_panel);
  bary_ = barycentric_weights(ref.nodes);
}

PanelInterpolator::Stencil PanelInterpolator::stencil(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  std::size_t panel = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  panel = std::min(panel, breaks_.size() - 2);
  const double a = breaks_[panel], b = breaks_[panel + 1];
  const double z = (2.0 * x - a - b) / (b - a);
  const QuadratureRule ref = gauss_legendre(per_panel_);

  Stencil s;
  s.first = panel * per_panel_;
  s.coeff.assign(per_panel_, 0.0);
  for (std::size_t j = 0; j < per_panel_; ++j) {
    if (z == ref.nodes[j]) {
      s.coeff[j] = 1.0;
      return s;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < per_panel_; ++j) {
    s.coeff[j] = bary_[j] / (z - ref.nodes[j]);
    denom += s.coeff[j];
  }
  for (double& c : s.coeff) c /= denom;
  return s;
}

}  // namespace breather
