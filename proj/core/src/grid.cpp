#include "lab/grid.hpp"

#include <cmath>
#include <string>

namespace lab {

void validate(const GridSpec& g) {
  if (g.nx < 3 || g.ny < 3) {
    throw GeometryError("GridSpec: nx and ny must be >= 3, got nx=" +
                        std::to_string(g.nx) + " ny=" + std::to_string(g.ny));
  }
  if (!(g.width() > 0.0) || !(g.height() > 0.0)) {
    throw GeometryError("GridSpec: box must have positive extent");
  }
  const double hx = g.width() / (g.nx - 1);
  const double hy = g.height() / (g.ny - 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy)) {
    throw GeometryError("GridSpec: cells must be square (hx=" + std::to_string(hx) +
                        ", hy=" + std::to_string(hy) + ")");
  }
}

double lp_norm(const GridSpec& g, const NodeField& v, double p) {
  const double h2 = g.h() * g.h();
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(h2 * s, 1.0 / p);
}

double dual_pair(const GridSpec& g, const NodeField& u, const NodeField& v) {
  const double h2 = g.h() * g.h();
  double s = 0.0;
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) s += u[i] * v[i];
  return h2 * s;
}

}  // namespace lab
