#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lab/grid.hpp"

namespace lab {

/// Growth/monotonicity/coercivity class parameters. q is always derived
/// from p so 1/p + 1/q = 1 holds exactly.
struct ClassParams {
  double p = 2.0;
  double alpha = 0.5;
  double beta = 2.0;
  /// Per-cell box bounds on the matrix entries; empty means the scalar
  /// defaults xi_lower_const / xi_upper_const everywhere.
  CellField xi_lower;
  CellField xi_upper;
  double xi_lower_const = 0.0;
  double xi_upper_const = 1e100;

  double q() const { return p / (p - 1.0); }
  double xi_lo(int cell) const { return xi_lower.empty() ? xi_lower_const : xi_lower[cell]; }
  double xi_hi(int cell) const { return xi_upper.empty() ? xi_upper_const : xi_upper[cell]; }
};

/// Throws if p is outside [2,4], alpha/beta are out of order, or the xi
/// bounds cross.
void validate(const ClassParams& params, const GridSpec& grid);

/// Reduced description of a diagonal control with exactly divergence-free
/// rows: a11 depends only on x2 (one value per cell row) and a22 only on
/// x1 (one value per cell column).
struct DiagonalProfiles {
  std::vector<double> a11_of_x2;  // size ny-1
  std::vector<double> a22_of_x1;  // size nx-1
};

/// Symmetric per-cell coefficient matrix on the hold-all box.
struct ControlField {
  enum class Form { diagonal, symmetric };

  GridSpec grid;
  Form form = Form::diagonal;
  CellField a11, a22;
  CellField a12;  // empty for diagonal form; a21 == a12 always
  /// Present iff the field was built from axis-constant profiles, in which
  /// case projections act on the profiles to preserve solenoidality.
  std::optional<DiagonalProfiles> profiles;

  bool diagonal() const { return form == Form::diagonal; }
  double off(int cell) const { return a12.empty() ? 0.0 : a12[cell]; }
};

/// Feasible interval for diagonal entries in a given cell:
/// [max(alpha, xi_lo), min(beta, xi_hi)].
struct FeasibleBox {
  double lo, hi;
};
FeasibleBox diagonal_feasible_box(const ClassParams& params, int cell);

/// Builds the diagonal solenoidal control a11(x) = profile1(x2),
/// a22(x) = profile2(x1). Profile values are clamped to the tightest
/// feasible interval along their line so the construction stays admissible
/// and exactly divergence free. Throws InfeasibleControlError if any line's
/// feasible interval is empty.
ControlField make_diagonal_control(const std::vector<double>& profile1,
                                   const std::vector<double>& profile2,
                                   const GridSpec& grid, const ClassParams& params);

/// Cellwise clamp of every entry to its feasible interval; diagonal entries
/// additionally to [alpha, beta]. Idempotent. Profile-parametrized fields
/// are clamped at the profile level.
ControlField project_box(const ControlField& U, const ClassParams& params);

/// Sampled verification of the growth, monotonicity and coercivity
/// conditions. Growth is checked exactly against beta; the other two are
/// evaluated on seeded vector pairs from [-1,1]^2, with the canonical
/// witnesses e1, e2, (1,1), (1,-1) always included first.
struct ClassReport {
  bool growth_ok = false;
  bool monotone_ok = false;
  bool coercive_ok = false;
  double growth_margin = 0.0;    // beta - max |a_ij|
  double monotone_margin = 0.0;  // worst pairing over cells and samples
  double coercive_margin = 0.0;  // worst coercivity slack
  int samples = 0;
  std::uint64_t seed = 0;
  int worst_growth_cell = -1;

  bool all_ok() const { return growth_ok && monotone_ok && coercive_ok; }
};

ClassReport check_class(const ControlField& U, const ClassParams& params,
                        int n_samples, std::uint64_t seed);

/// Weak divergence densities of the two matrix rows, tested against nodal
/// hat functions with the solver's forward differences. Exactly zero at
/// interior nodes for profile-parametrized diagonal fields.
struct RowDivergence {
  NodeField row1;
  NodeField row2;
};
RowDivergence row_divergence(const ControlField& U);

/// JSON round-trip for checkpoints; binary layout is little-endian f64,
/// row-major cells, entries ordered a11, a12, a21, a22.
std::string control_to_json(const ControlField& U, const ClassParams& params);
void write_control_binary(const ControlField& U, const std::string& path);

}  // namespace lab
