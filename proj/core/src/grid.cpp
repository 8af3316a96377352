#include "breather/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "breather/error.hpp"

namespace breather {

std::string to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::Full: return "full";
  }
  return "?";
}

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  if (s == "full") return Parity::Full;
  throw ConfigError("unknown parity '" + s + "' (expected even, odd or full)");
}

std::vector<double> SpatialGrid::points() const {
  std::vector<double> xs(n_points);
  for (std::size_t j = 0; j < n_points; ++j) xs[j] = x(j);
  return xs;
}

bool SpatialGrid::symmetric() const { return std::abs(x_min + x_max) <= 1e-12 * (x_max - x_min); }

std::vector<double> SpatialGrid::wavenumbers() const {
  std::vector<double> k(n_points);
  const double base = 2.0 * std::numbers::pi / (x_max - x_min);
  const auto n = static_cast<long>(n_points);
  for (long j = 0; j < n; ++j) k[static_cast<std::size_t>(j)] = base * static_cast<double>(j < n / 2 ? j : j - n);
  return k;
}

void SpatialGrid::validate() const {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max))
    throw InvalidArgument("spatial grid needs finite x_min < x_max");
  if (n_points < 256 || (n_points & (n_points - 1)) != 0) {
    std::ostringstream msg;
    msg << "spatial grid needs a power-of-two point count >= 256, got " << n_points;
    throw InvalidArgument(msg.str());
  }
}

SpectralGrid SpectralGrid::make(Parity parity, double lambda_max, std::size_t panels,
                                std::size_t nodes_per_panel) {
  if (!(lambda_max > 0.0) || panels == 0 || nodes_per_panel == 0)
    throw InvalidArgument("spectral grid needs lambda_max > 0 and nonzero panel/node counts");
  std::vector<double> breaks;
  if (parity == Parity::Full) {
    breaks.resize(2 * panels + 1);
    for (std::size_t i = 0; i <= 2 * panels; ++i)
      breaks[i] = -lambda_max + lambda_max * static_cast<double>(i) / static_cast<double>(panels);
  } else {
    breaks.resize(panels + 1);
    for (std::size_t i = 0; i <= panels; ++i)
      breaks[i] = lambda_max * static_cast<double>(i) / static_cast<double>(panels);
  }
  SpectralGrid g = from_breaks(parity, std::move(breaks), nodes_per_panel);
  g.panels = panels;
  return g;
}

SpectralGrid SpectralGrid::from_breaks(Parity parity, std::vector<double> breaks,
                                       std::size_t nodes_per_panel) {
  SpectralGrid g;
  g.parity = parity;
  g.nodes_per_panel = nodes_per_panel;
  const QuadratureRule rule = composite_gauss_legendre(breaks, nodes_per_panel);
  g.nodes = rule.nodes;
  g.weights = rule.weights;
  g.lambda_max = breaks.back();
  g.panels = breaks.size() - 1;
  g.breaks = std::move(breaks);
  g.validate();
  return g;
}

void SpectralGrid::validate() const {
  if (nodes.size() != weights.size() || nodes.empty())
    throw InvalidArgument("spectral grid nodes and weights must be nonempty and of equal length");
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (!(weights[j] > 0.0)) throw InvalidArgument("spectral grid weights must be positive");
    if (j > 0 && !(nodes[j] > nodes[j - 1]))
      throw InvalidArgument("spectral grid nodes must be strictly increasing");
  }
  if (parity != Parity::Full && nodes.front() < 0.0)
    throw InvalidArgument("parity spectral grids live on lambda >= 0");
}

double WaveField::norm_squared() const {
  double acc = 0.0;
  for (const cplx& v : samples) acc += std::norm(v);
  return acc * grid.dx();
}

double WaveField::norm() const { return std::sqrt(norm_squared()); }

cplx inner_product(const SpatialGrid& grid, const std::vector<cplx>& f, const std::vector<cplx>& g) {
  if (f.size() != grid.n_points || g.size() != grid.n_points)
    throw GridMismatch("inner product of fields with the wrong sample count");
  cplx acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += std::conj(f[j]) * g[j];
  return acc * grid.dx();
}

}  // namespace breather
