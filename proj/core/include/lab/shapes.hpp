#pragma once

#include <array>
#include <vector>

#include "lab/grid.hpp"

namespace lab {

/// Declarative description of an open subset of the hold-all box.
/// Membership is decided pointwise by contains(), which the rasterizer
/// samples at node centers.
struct ShapeSpec {
  enum class Kind {
    box_margin,    // box shrunk by `margin` on every side
    rect,          // open axis-aligned rectangle
    disk,          // open disk
    polygon,       // simple polygon (even-odd rule), open
    sine_channel,  // band of width `width` around a sine curve; used for cracks
    union_,
    intersection,
    difference     // children[0] minus the closure of children[1..]
  };

  Kind kind = Kind::union_;
  double margin = 0.0;                     // box_margin
  std::array<double, 4> rect{};            // rect: x0, y0, x1, y1
  std::array<double, 2> center{};          // disk
  double radius = 0.0;                     // disk
  std::vector<std::array<double, 2>> vertices;  // polygon
  // sine_channel: |y - (y0 + amplitude*sin(2*pi*waves*(x-x0)/(x1-x0)))| < width/2
  double y0 = 0.0, x0 = 0.0, x1 = 0.0, amplitude = 0.0, waves = 1.0, width = 0.0;
  std::vector<ShapeSpec> children;

  bool contains(double px, double py, const GridSpec& grid) const;

  static ShapeSpec BoxMargin(double m);
  static ShapeSpec Rect(double ax, double ay, double bx, double by);
  static ShapeSpec Disk(double cx, double cy, double r);
  static ShapeSpec Polygon(std::vector<std::array<double, 2>> verts);
  static ShapeSpec SineChannel(double y0, double x0, double x1, double amplitude,
                               double waves, double width);
  static ShapeSpec Union(std::vector<ShapeSpec> parts);
  static ShapeSpec Intersection(std::vector<ShapeSpec> parts);
  static ShapeSpec Difference(ShapeSpec base, ShapeSpec hole);
};

}  // namespace lab
