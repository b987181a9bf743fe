#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lab/grid.hpp"
#include "lab/shapes.hpp"

namespace lab {

/// Rasterized open subset of the hold-all box. The node mask is sampled at
/// node centers; a cell belongs to the domain iff all four corner nodes do.
/// The complement is represented by the non-mask nodes, whose outermost
/// layer adjacent to the mask is the discrete boundary of the set.
struct GridDomain {
  GridSpec grid;
  std::vector<std::uint8_t> mask;       // per node, 1 = inside
  std::vector<std::uint8_t> cell_mask;  // per cell, 1 = inside
  double measure = 0.0;                 // h^2 * number of inside cells, exact

  bool inside(int i, int j) const { return mask[grid.node(i, j)] != 0; }
  int inside_node_count() const;

  static GridDomain empty(const GridSpec& g);
  /// Builds cell_mask and measure from grid+mask; enforces the invariants.
  static GridDomain from_mask(const GridSpec& g, std::vector<std::uint8_t> mask);
};

/// Throws GeometryError if a masked node sits on the outer boundary of the
/// box or if mask/cell_mask/measure are inconsistent.
void validate(const GridDomain& d);

/// Node-center sampling of the described open set.
/// Throws GeometryError for empty results or shapes touching the box rim.
GridDomain rasterize(const ShapeSpec& shape, const GridSpec& grid);

/// Exact Euclidean distance to the complement (the non-mask nodes),
/// computed by the two-pass lower-envelope-of-parabolas transform.
/// Zero exactly off the mask, >= h on the mask; empty domains give zeros.
NodeField distance_transform(const GridDomain& d);

/// Hausdorff-complementary distance: sup over nodes of the absolute
/// difference of the two complement distance transforms.
double hc_distance(const GridDomain& a, const GridDomain& b);

/// Measure of the symmetric difference, counted on cells.
double ekeland_distance(const GridDomain& a, const GridDomain& b);

/// Perturbation family kinds. Cracks are rasterized as removed channels of
/// one cell width; the continuum crack has zero measure, which a grid
/// cannot represent.
enum class FamilyKind { dumbbell, oscillating_crack, shrinking_hole, polygon_disk };

/// Kind-specific geometry with usable defaults; lengths in box units.
struct FamilyGeometry {
  // dumbbell: two disks joined by a handle of width eps, with a hole of
  // radius eps/2 at each disk center.
  double disk_radius = 0.16;
  double cx1 = 0.28, cx2 = 0.72, cy = 0.5;
  // shrinking_hole / polygon_disk: one disk with concentric features.
  double cx = 0.5;
  double r = 0.35;
  // oscillating_crack: crack along y = crack_y for x in [crack_x0, crack_x1],
  // vertical amplitude eps, inside a box_margin base region.
  double base_margin = 0.15;
  double crack_y = 0.5, crack_x0 = 0.15, crack_x1 = 0.7;
  double crack_waves = 3.0;
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::shrinking_hole;
  FamilyGeometry geometry;
  std::vector<double> eps_list;  // strictly decreasing, each > 2h
};

struct DomainFamily {
  FamilySpec spec;
  std::vector<GridDomain> domains;  // ordered by decreasing eps
  GridDomain limit;
};

/// One domain per eps plus the limit set. For dumbbell the limit is the two
/// disjoint disks; for oscillating_crack the straight-crack set; for
/// shrinking_hole the disk punctured at the node nearest its center; for
/// polygon_disk the disk itself.
DomainFamily family_generate(const FamilySpec& f, const GridSpec& grid);

/// Grid-resolution verdicts for the set-convergence conditions applied to
/// complements. The tail is the second half of the sequence. These are
/// statements about the supplied finite sequence at the given tolerance,
/// never about the continuum.
struct KuratowskiReport {
  double tol = 0.0;
  int tail_start = 0;
  // Attainability: per element, sup over limit-complement nodes of the
  // distance to that element's complement.
  std::vector<double> k1_sup;
  bool k1_pass = false;  // every tail element's sup <= tol
  // Cluster containment: nodes lying in every tail complement, checked
  // against the limit complement.
  int cluster_nodes = 0;
  double k2_worst = 0.0;
  bool k2_pass = false;
};

KuratowskiReport kuratowski_check(std::span<const GridDomain> seq,
                                  const GridDomain& limit, double tol);

/// Binary PGM (P5), 255 = inside.
void write_pgm(const GridDomain& d, const std::string& path);

}  // namespace lab
