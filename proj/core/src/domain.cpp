#include "lab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lab/errors.hpp"

namespace lab {

int GridDomain::inside_node_count() const {
  int n = 0;
  for (auto m : mask) n += (m != 0);
  return n;
}

GridDomain GridDomain::empty(const GridSpec& g) {
  GridDomain d;
  d.grid = g;
  d.mask.assign(g.nodes(), 0);
  d.cell_mask.assign(g.cells(), 0);
  d.measure = 0.0;
  return d;
}

GridDomain GridDomain::from_mask(const GridSpec& g, std::vector<std::uint8_t> mask) {
  GridDomain d;
  d.grid = g;
  d.mask = std::move(mask);
  d.cell_mask.assign(g.cells(), 0);
  int count = 0;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const bool in = d.mask[g.node(i, j)] && d.mask[g.node(i + 1, j)] &&
                      d.mask[g.node(i, j + 1)] && d.mask[g.node(i + 1, j + 1)];
      d.cell_mask[g.cell(i, j)] = in ? 1 : 0;
      count += in;
    }
  }
  d.measure = g.h() * g.h() * count;
  validate(d);
  return d;
}

void validate(const GridDomain& d) {
  validate(d.grid);
  const auto& g = d.grid;
  if (static_cast<int>(d.mask.size()) != g.nodes() ||
      static_cast<int>(d.cell_mask.size()) != g.cells()) {
    throw GeometryError("GridDomain: field sizes do not match the grid");
  }
  for (int i = 0; i < g.nx; ++i) {
    if (d.mask[g.node(i, 0)] || d.mask[g.node(i, g.ny - 1)]) {
      throw GeometryError("GridDomain: masked node on the box boundary (domain "
                          "must be compactly contained in D)");
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    if (d.mask[g.node(0, j)] || d.mask[g.node(g.nx - 1, j)]) {
      throw GeometryError("GridDomain: masked node on the box boundary (domain "
                          "must be compactly contained in D)");
    }
  }
  int count = 0;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const bool in = d.mask[g.node(i, j)] && d.mask[g.node(i + 1, j)] &&
                      d.mask[g.node(i, j + 1)] && d.mask[g.node(i + 1, j + 1)];
      if ((d.cell_mask[g.cell(i, j)] != 0) != in) {
        throw GeometryError("GridDomain: cell_mask inconsistent with mask");
      }
      count += in;
    }
  }
  if (d.measure != g.h() * g.h() * count) {
    throw GeometryError("GridDomain: measure must equal h^2 * inside cell count");
  }
}

GridDomain rasterize(const ShapeSpec& shape, const GridSpec& grid) {
  validate(grid);
  std::vector<std::uint8_t> mask(grid.nodes(), 0);
  int inside = 0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (shape.contains(grid.x(i), grid.y(j), grid)) {
        mask[grid.node(i, j)] = 1;
        ++inside;
        if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1) {
          throw GeometryError("rasterize: shape touches the box boundary");
        }
      }
    }
  }
  if (inside == 0) {
    throw GeometryError("rasterize: shape description is empty at this grid");
  }
  return GridDomain::from_mask(grid, std::move(mask));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared-distance transform by the lower envelope of parabolas.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
            std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf) {
      // no finite site yet
      v[0] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {
    std::fill(d.begin(), d.begin() + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

NodeField distance_transform(const GridDomain& d) {
  validate(d);
  const auto& g = d.grid;
  const int nx = g.nx, ny = g.ny;
  // Squared distances in index units; seeds are the complement nodes.
  std::vector<double> sq(g.nodes());
  for (int n = 0; n < g.nodes(); ++n) sq[n] = d.mask[n] ? kInf : 0.0;

  const int nmax = std::max(nx, ny);
  std::vector<double> f(nmax), out(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) f[i] = sq[g.node(i, j)];
    edt_1d(f, out, nx, v, z);
    for (int i = 0; i < nx; ++i) sq[g.node(i, j)] = out[i];
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) f[j] = sq[g.node(i, j)];
    edt_1d(f, out, ny, v, z);
    for (int j = 0; j < ny; ++j) sq[g.node(i, j)] = out[j];
  }

  NodeField dist(g.nodes());
  const double h = g.h();
  for (int n = 0; n < g.nodes(); ++n) {
    dist[n] = (sq[n] == kInf) ? kInf : h * std::sqrt(sq[n]);
  }
  return dist;
}

double hc_distance(const GridDomain& a, const GridDomain& b) {
  if (!(a.grid == b.grid)) {
    throw GridMismatchError("hc_distance: domains live on different grids");
  }
  const NodeField da = distance_transform(a);
  const NodeField db = distance_transform(b);
  double sup = 0.0;
  for (std::size_t n = 0; n < da.size(); ++n) {
    sup = std::max(sup, std::abs(da[n] - db[n]));
  }
  return sup;
}

double ekeland_distance(const GridDomain& a, const GridDomain& b) {
  if (!(a.grid == b.grid)) {
    throw GridMismatchError("ekeland_distance: domains live on different grids");
  }
  int diff = 0;
  for (std::size_t c = 0; c < a.cell_mask.size(); ++c) {
    diff += (a.cell_mask[c] != b.cell_mask[c]);
  }
  return a.grid.h() * a.grid.h() * diff;
}

namespace {

double snap(double coord, double origin, double h) {
  return origin + std::round((coord - origin) / h) * h;
}

ShapeSpec dumbbell_shape(const FamilyGeometry& geo, double eps) {
  auto body = ShapeSpec::Union({
      ShapeSpec::Disk(geo.cx1, geo.cy, geo.disk_radius),
      ShapeSpec::Disk(geo.cx2, geo.cy, geo.disk_radius),
      ShapeSpec::Rect(geo.cx1, geo.cy - 0.5 * eps, geo.cx2, geo.cy + 0.5 * eps),
  });
  auto holes = ShapeSpec::Union({
      ShapeSpec::Disk(geo.cx1, geo.cy, 0.5 * eps),
      ShapeSpec::Disk(geo.cx2, geo.cy, 0.5 * eps),
  });
  return ShapeSpec::Difference(std::move(body), std::move(holes));
}

ShapeSpec polygon_disk_shape(const FamilyGeometry& geo, double eps) {
  // Regular n-gon whose edge sagitta r*(1-cos(pi/n)) stays below eps.
  const double ratio = std::min(1.0, eps / geo.r);
  int n = static_cast<int>(std::ceil(M_PI / std::acos(1.0 - ratio)));
  n = std::max(n, 3);
  std::vector<std::array<double, 2>> verts;
  verts.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n + M_PI / n;
    verts.push_back({geo.cx + geo.r * std::cos(a), geo.cy + geo.r * std::sin(a)});
  }
  return ShapeSpec::Polygon(std::move(verts));
}

}  // namespace

DomainFamily family_generate(const FamilySpec& f, const GridSpec& grid) {
  validate(grid);
  const double h = grid.h();
  if (f.eps_list.empty()) {
    throw GeometryError("family_generate: eps_list is empty");
  }
  for (std::size_t k = 0; k < f.eps_list.size(); ++k) {
    const double e = f.eps_list[k];
    if (!(e > 2.0 * h)) {
      throw GeometryError("family_generate: eps = " + std::to_string(e) +
                          " is not resolvable at this grid (must exceed 2h = " +
                          std::to_string(2.0 * h) + ")");
    }
    if (k > 0 && !(e < f.eps_list[k - 1])) {
      throw GeometryError("family_generate: eps_list must be strictly decreasing");
    }
  }

  FamilyGeometry geo = f.geometry;
  DomainFamily out;
  out.spec = f;

  switch (f.kind) {
    case FamilyKind::dumbbell: {
      for (double eps : f.eps_list) {
        out.domains.push_back(rasterize(dumbbell_shape(geo, eps), grid));
      }
      out.limit = rasterize(ShapeSpec::Union({
                                ShapeSpec::Disk(geo.cx1, geo.cy, geo.disk_radius),
                                ShapeSpec::Disk(geo.cx2, geo.cy, geo.disk_radius),
                            }),
                            grid);
      break;
    }
    case FamilyKind::shrinking_hole: {
      // Snap the center to the nearest node so the limit puncture is a
      // single well-defined node.
      geo.cx = snap(geo.cx, grid.box[0], h);
      geo.cy = snap(geo.cy, grid.box[1], h);
      for (double eps : f.eps_list) {
        out.domains.push_back(rasterize(
            ShapeSpec::Difference(ShapeSpec::Disk(geo.cx, geo.cy, geo.r),
                                  ShapeSpec::Disk(geo.cx, geo.cy, eps)),
            grid));
      }
      out.limit = rasterize(
          ShapeSpec::Difference(ShapeSpec::Disk(geo.cx, geo.cy, geo.r),
                                ShapeSpec::Disk(geo.cx, geo.cy, 0.25 * h)),
          grid);
      break;
    }
    case FamilyKind::oscillating_crack: {
      auto base = ShapeSpec::BoxMargin(geo.base_margin);
      for (double eps : f.eps_list) {
        out.domains.push_back(rasterize(
            ShapeSpec::Difference(base, ShapeSpec::SineChannel(geo.crack_y, geo.crack_x0,
                                                               geo.crack_x1, eps,
                                                               geo.crack_waves, h)),
            grid));
      }
      out.limit = rasterize(
          ShapeSpec::Difference(base, ShapeSpec::SineChannel(geo.crack_y, geo.crack_x0,
                                                             geo.crack_x1, 0.0,
                                                             geo.crack_waves, h)),
          grid);
      break;
    }
    case FamilyKind::polygon_disk: {
      for (double eps : f.eps_list) {
        out.domains.push_back(rasterize(polygon_disk_shape(geo, eps), grid));
      }
      out.limit = rasterize(ShapeSpec::Disk(geo.cx, geo.cy, geo.r), grid);
      break;
    }
  }
  return out;
}

KuratowskiReport kuratowski_check(std::span<const GridDomain> seq,
                                  const GridDomain& limit, double tol) {
  if (seq.empty()) {
    throw GeometryError("kuratowski_check: empty sequence");
  }
  for (const auto& d : seq) {
    if (!(d.grid == limit.grid)) {
      throw GridMismatchError("kuratowski_check: domains live on different grids");
    }
  }
  const auto& g = limit.grid;
  KuratowskiReport rep;
  rep.tol = tol;
  rep.tail_start = static_cast<int>(seq.size()) / 2;

  // distance_transform gives, at every node, the distance to the set's
  // complement, which is exactly what both conditions consume.
  const NodeField dist_to_limit_c = distance_transform(limit);

  rep.k1_pass = true;
  std::vector<std::uint8_t> in_all_tail_complements(g.nodes(), 1);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const NodeField dist_c = distance_transform(seq[k]);
    double sup = 0.0;
    for (int n = 0; n < g.nodes(); ++n) {
      if (!limit.mask[n]) sup = std::max(sup, dist_c[n]);
    }
    rep.k1_sup.push_back(sup);
    if (static_cast<int>(k) >= rep.tail_start) {
      if (sup > tol) rep.k1_pass = false;
      for (int n = 0; n < g.nodes(); ++n) {
        if (seq[k].mask[n]) in_all_tail_complements[n] = 0;
      }
    }
  }

  rep.k2_worst = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    if (in_all_tail_complements[n]) {
      ++rep.cluster_nodes;
      rep.k2_worst = std::max(rep.k2_worst, dist_to_limit_c[n]);
    }
  }
  rep.k2_pass = rep.k2_worst <= tol;
  return rep;
}

void write_pgm(const GridDomain& d, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw LabError("write_pgm: cannot open " + path);
  std::fprintf(fp, "P5\n%d %d\n255\n", d.grid.nx, d.grid.ny);
  // Top row first so the image reads with x2 pointing up.
  for (int j = d.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < d.grid.nx; ++i) {
      const unsigned char px = d.mask[d.grid.node(i, j)] ? 255 : 0;
      std::fwrite(&px, 1, 1, fp);
    }
  }
  std::fclose(fp);
}

}  // namespace lab
