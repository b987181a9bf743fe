#include "lab/shapes.hpp"

#include <cmath>

namespace lab {

namespace {

bool point_in_polygon(const std::vector<std::array<double, 2>>& v, double px, double py) {
  // Even-odd ray casting.
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = v[i][0], yi = v[i][1];
    const double xj = v[j][0], yj = v[j][1];
    if ((yi > py) != (yj > py)) {
      const double xint = xj + (py - yj) / (yi - yj) * (xi - xj);
      if (px < xint) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

bool ShapeSpec::contains(double px, double py, const GridSpec& grid) const {
  switch (kind) {
    case Kind::box_margin: {
      const auto& b = grid.box;
      return px > b[0] + margin && px < b[2] - margin && py > b[1] + margin &&
             py < b[3] - margin;
    }
    case Kind::rect:
      return px > rect[0] && px < rect[2] && py > rect[1] && py < rect[3];
    case Kind::disk: {
      const double dx = px - center[0];
      const double dy = py - center[1];
      return dx * dx + dy * dy < radius * radius;
    }
    case Kind::polygon:
      return point_in_polygon(vertices, px, py);
    case Kind::sine_channel: {
      if (px < x0 || px > x1) return false;
      const double span = x1 - x0;
      const double curve =
          y0 + amplitude * std::sin(2.0 * M_PI * waves * (px - x0) / span);
      return std::abs(py - curve) < 0.5 * width;
    }
    case Kind::union_: {
      for (const auto& c : children)
        if (c.contains(px, py, grid)) return true;
      return false;
    }
    case Kind::intersection: {
      if (children.empty()) return false;
      for (const auto& c : children)
        if (!c.contains(px, py, grid)) return false;
      return true;
    }
    case Kind::difference: {
      if (children.empty()) return false;
      if (!children[0].contains(px, py, grid)) return false;
      // Subtract the closure: a point on the removed set's own sampling
      // boundary counts as removed, so "contains" on holes is inclusive
      // via a non-strict test below for disks of radius 0 (node punctures).
      for (std::size_t k = 1; k < children.size(); ++k) {
        const auto& hole = children[k];
        if (hole.kind == Kind::disk) {
          const double dx = px - hole.center[0];
          const double dy = py - hole.center[1];
          if (dx * dx + dy * dy <= hole.radius * hole.radius) return false;
        } else if (hole.contains(px, py, grid)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

ShapeSpec ShapeSpec::BoxMargin(double m) {
  ShapeSpec s;
  s.kind = Kind::box_margin;
  s.margin = m;
  return s;
}

ShapeSpec ShapeSpec::Rect(double ax, double ay, double bx, double by) {
  ShapeSpec s;
  s.kind = Kind::rect;
  s.rect = {ax, ay, bx, by};
  return s;
}

ShapeSpec ShapeSpec::Disk(double cx, double cy, double r) {
  ShapeSpec s;
  s.kind = Kind::disk;
  s.center = {cx, cy};
  s.radius = r;
  return s;
}

ShapeSpec ShapeSpec::Polygon(std::vector<std::array<double, 2>> verts) {
  ShapeSpec s;
  s.kind = Kind::polygon;
  s.vertices = std::move(verts);
  return s;
}

ShapeSpec ShapeSpec::SineChannel(double y0, double x0, double x1, double amplitude,
                                 double waves, double width) {
  ShapeSpec s;
  s.kind = Kind::sine_channel;
  s.y0 = y0;
  s.x0 = x0;
  s.x1 = x1;
  s.amplitude = amplitude;
  s.waves = waves;
  s.width = width;
  return s;
}

ShapeSpec ShapeSpec::Union(std::vector<ShapeSpec> parts) {
  ShapeSpec s;
  s.kind = Kind::union_;
  s.children = std::move(parts);
  return s;
}

ShapeSpec ShapeSpec::Intersection(std::vector<ShapeSpec> parts) {
  ShapeSpec s;
  s.kind = Kind::intersection;
  s.children = std::move(parts);
  return s;
}

ShapeSpec ShapeSpec::Difference(ShapeSpec base, ShapeSpec hole) {
  ShapeSpec s;
  s.kind = Kind::difference;
  s.children.push_back(std::move(base));
  s.children.push_back(std::move(hole));
  return s;
}

}  // namespace lab
