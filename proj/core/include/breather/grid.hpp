#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "breather/quadrature.hpp"

namespace breather {

using cplx = std::complex<double>;

enum class Parity { Even, Odd, Full };

std::string to_string(Parity p);
/// "even", "odd", "full"; throws ConfigError otherwise.
Parity parse_parity(const std::string& s);

/// Uniform periodic grid x_j = x_min + j dx, j = 0..n-1, dx = (x_max - x_min)/n.
struct SpatialGrid {
  double x_min = -80.0;
  double x_max = 80.0;
  std::size_t n_points = 1024;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points); }
  double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx(); }
  std::vector<double> points() const;
  /// Index of the point at -x_j (requires a symmetric grid).
  std::size_t mirror(std::size_t j) const { return (n_points - j) % n_points; }
  bool symmetric() const;
  /// Angular wavenumbers in FFT order.
  std::vector<double> wavenumbers() const;

  /// n_points a power of two >= 256, x_min < x_max.
  void validate() const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Composite Gauss-Legendre nodes on [0, lambda_max] (even/odd) or
/// [-lambda_max, lambda_max] (full).
struct SpectralGrid {
  Parity parity = Parity::Odd;
  double lambda_max = 3.0;
  std::size_t panels = 24;
  std::size_t nodes_per_panel = 16;
  std::vector<double> breaks;
  std::vector<double> nodes;
  std::vector<double> weights;

  static SpectralGrid make(Parity parity, double lambda_max, std::size_t panels = 24,
                           std::size_t nodes_per_panel = 16);
  /// Panels given explicitly by their break points.
  static SpectralGrid from_breaks(Parity parity, std::vector<double> breaks,
                                  std::size_t nodes_per_panel = 16);

  std::size_t size() const { return nodes.size(); }
  void validate() const;
};

struct WaveField {
  SpatialGrid grid;
  std::vector<cplx> samples;
  double time = 0.0;

  double norm() const;
  double norm_squared() const;
};

/// sum_j conj(f_j) g_j dx
cplx inner_product(const SpatialGrid& grid, const std::vector<cplx>& f, const std::vector<cplx>& g);

}  // namespace breather
