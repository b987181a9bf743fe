#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lab/errors.hpp"

namespace lab {

/// Uniform tensor grid of nodes covering the hold-all box D.
/// Nodes are indexed (i, j) with i running along x1 and j along x2;
/// cells are indexed by their lower-left corner node.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  /// x0, y0, x1, y1 of the hold-all box. Cells must be square.
  std::array<double, 4> box{0.0, 0.0, 1.0, 1.0};

  double width() const { return box[2] - box[0]; }
  double height() const { return box[3] - box[1]; }

  /// Cell width. The grid is validated to have square cells, so a single
  /// h serves both axes.
  double h() const { return width() / static_cast<double>(nx - 1); }

  int nodes() const { return nx * ny; }
  int cells() const { return (nx - 1) * (ny - 1); }

  int node(int i, int j) const { return j * nx + i; }
  int cell(int i, int j) const { return j * (nx - 1) + i; }

  double x(int i) const { return box[0] + i * h(); }
  double y(int j) const { return box[1] + j * h(); }

  double cell_cx(int i) const { return box[0] + (i + 0.5) * h(); }
  double cell_cy(int j) const { return box[1] + (j + 0.5) * h(); }

  bool operator==(const GridSpec&) const = default;
};

/// Throws GeometryError unless nx, ny >= 3, h > 0 and cells are square.
void validate(const GridSpec& g);

/// Nodal scalar field, row-major over (j, i).
using NodeField = std::vector<double>;
/// Per-cell scalar field, row-major over (j, i) of lower-left corners.
using CellField = std::vector<double>;

inline NodeField zero_nodes(const GridSpec& g) { return NodeField(g.nodes(), 0.0); }
inline CellField zero_cells(const GridSpec& g) { return CellField(g.cells(), 0.0); }

/// Discrete L^p norm with cell-area quadrature weights, over all nodes:
/// (h^2 sum |v_i|^p)^(1/p). Functions extended by zero make the same
/// formula valid over a subdomain and over D.
double lp_norm(const GridSpec& g, const NodeField& v, double p);

/// Duality pairing <u, v> = h^2 sum u_i v_i over all nodes.
double dual_pair(const GridSpec& g, const NodeField& u, const NodeField& v);

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace lab
