#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace breather {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre on the panels delimited by `breaks` (strictly
/// increasing), `nodes_per_panel` points each.
QuadratureRule composite_gauss_legendre(std::span<const double> breaks, std::size_t nodes_per_panel);

/// Uniform panels on [a, b].
QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                        std::size_t nodes_per_panel);

/// Barycentric Lagrange weights for an arbitrary node set.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Interpolates data given on a composite Gauss-Legendre rule back to any
/// point in its range, using the polynomial of the panel containing x.
class PanelInterpolator {
 public:
  PanelInterpolator(std::span<const double> breaks, std::size_t nodes_per_panel);

  const std::vector<double>& nodes() const { return nodes_; }

  /// Interpolation coefficients for point x: value = sum_j coeff[j] * data[first + j].
  struct Stencil {
    std::size_t first = 0;
    std::vector<double> coeff;
  };
  Stencil stencil(double x) const;

 private:
  std::vector<double> breaks_;
  std::size_t per_panel_;
  std::vector<double> nodes_;
  std::vector<double> bary_;  // reference-panel barycentric weights
};

}  // namespace breather
