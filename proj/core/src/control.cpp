#include "lab/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lab/errors.hpp"
#include "lab/rng.hpp"

#include "json.hpp"

namespace lab {

namespace {

inline double power_law(double t, double p) {
  // |t|^(p-2) * t, the diagonal weight entry applied to a component.
  if (t == 0.0) return 0.0;
  return std::pow(std::abs(t), p - 2.0) * t;
}

// p-th power of the Hoelder norm |zeta|_p, kept un-rooted so the equality
// cases of the coercivity bound evaluate exactly.
inline double holder_norm_pow(double z1, double z2, double p) {
  return std::pow(std::abs(z1), p) + std::pow(std::abs(z2), p);
}

}  // namespace

void validate(const ClassParams& params, const GridSpec& grid) {
  std::vector<std::string> bad;
  if (!(params.p >= 2.0 && params.p <= 4.0)) {
    bad.push_back("p must lie in [2,4], got " + std::to_string(params.p));
  }
  if (!(params.alpha > 0.0)) bad.push_back("alpha must be positive");
  if (!(params.alpha <= params.beta)) bad.push_back("alpha must not exceed beta");
  if (!params.xi_lower.empty() &&
      static_cast<int>(params.xi_lower.size()) != grid.cells()) {
    bad.push_back("xi_lower field size does not match the grid");
  }
  if (!params.xi_upper.empty() &&
      static_cast<int>(params.xi_upper.size()) != grid.cells()) {
    bad.push_back("xi_upper field size does not match the grid");
  }
  if (bad.empty()) {
    for (int c = 0; c < grid.cells(); ++c) {
      if (!(params.xi_lo(c) >= 0.0) || params.xi_lo(c) > params.xi_hi(c)) {
        bad.push_back("xi bounds must satisfy 0 <= xi_lower <= xi_upper (cell " +
                      std::to_string(c) + ")");
        break;
      }
    }
  }
  if (!bad.empty()) throw ConfigError(std::move(bad));
}

FeasibleBox diagonal_feasible_box(const ClassParams& params, int cell) {
  return {std::max(params.alpha, params.xi_lo(cell)),
          std::min(params.beta, params.xi_hi(cell))};
}

ControlField make_diagonal_control(const std::vector<double>& profile1,
                                   const std::vector<double>& profile2,
                                   const GridSpec& grid, const ClassParams& params) {
  validate(grid);
  validate(params, grid);
  const int cx = grid.nx - 1, cy = grid.ny - 1;
  if (static_cast<int>(profile1.size()) != cy ||
      static_cast<int>(profile2.size()) != cx) {
    throw InfeasibleControlError(
        "make_diagonal_control: profile sizes must be (ny-1) and (nx-1)");
  }

  // Tightest feasible interval along each cell line, so clamping a profile
  // value keeps every cell on the line admissible.
  auto line_box = [&](bool row, int idx) -> FeasibleBox {
    FeasibleBox fb{-1e300, 1e300};
    const int n = row ? cx : cy;
    for (int k = 0; k < n; ++k) {
      const int cell = row ? grid.cell(k, idx) : grid.cell(idx, k);
      const FeasibleBox b = diagonal_feasible_box(params, cell);
      fb.lo = std::max(fb.lo, b.lo);
      fb.hi = std::min(fb.hi, b.hi);
    }
    return fb;
  };

  ControlField U;
  U.grid = grid;
  U.form = ControlField::Form::diagonal;
  U.a11.assign(grid.cells(), 0.0);
  U.a22.assign(grid.cells(), 0.0);
  DiagonalProfiles prof;
  prof.a11_of_x2.resize(cy);
  prof.a22_of_x1.resize(cx);

  for (int j = 0; j < cy; ++j) {
    const FeasibleBox fb = line_box(true, j);
    if (fb.lo > fb.hi) {
      throw InfeasibleControlError(
          "make_diagonal_control: empty feasible interval on cell row " +
          std::to_string(j));
    }
    prof.a11_of_x2[j] = std::clamp(profile1[j], fb.lo, fb.hi);
  }
  for (int i = 0; i < cx; ++i) {
    const FeasibleBox fb = line_box(false, i);
    if (fb.lo > fb.hi) {
      throw InfeasibleControlError(
          "make_diagonal_control: empty feasible interval on cell column " +
          std::to_string(i));
    }
    prof.a22_of_x1[i] = std::clamp(profile2[i], fb.lo, fb.hi);
  }

  for (int j = 0; j < cy; ++j) {
    for (int i = 0; i < cx; ++i) {
      U.a11[grid.cell(i, j)] = prof.a11_of_x2[j];
      U.a22[grid.cell(i, j)] = prof.a22_of_x1[i];
    }
  }
  U.profiles = std::move(prof);
  return U;
}

ControlField project_box(const ControlField& U, const ClassParams& params) {
  ControlField out = U;
  const GridSpec& g = U.grid;
  if (U.profiles.has_value()) {
    // Clamp the reduced profiles, then re-expand; the result is still
    // axis-constant, hence exactly solenoidal.
    std::vector<double> p1 = U.profiles->a11_of_x2;
    std::vector<double> p2 = U.profiles->a22_of_x1;
    return make_diagonal_control(p1, p2, g, params);
  }
  for (int c = 0; c < g.cells(); ++c) {
    const FeasibleBox fb = diagonal_feasible_box(params, c);
    out.a11[c] = std::clamp(U.a11[c], fb.lo, fb.hi);
    out.a22[c] = std::clamp(U.a22[c], fb.lo, fb.hi);
    if (!out.a12.empty()) {
      const double off_lo = std::max(-params.beta, params.xi_lo(c));
      const double off_hi = std::min(params.beta, params.xi_hi(c));
      out.a12[c] = std::clamp(U.a12[c], off_lo, off_hi);
    }
  }
  return out;
}

ClassReport check_class(const ControlField& U, const ClassParams& params,
                        int n_samples, std::uint64_t seed) {
  const GridSpec& g = U.grid;
  const double p = params.p;
  ClassReport rep;
  rep.samples = n_samples;
  rep.seed = seed;

  // Growth, exact.
  double max_entry = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    const double m =
        std::max({std::abs(U.a11[c]), std::abs(U.a22[c]), std::abs(U.off(c))});
    if (m > max_entry) {
      max_entry = m;
      rep.worst_growth_cell = c;
    }
  }
  rep.growth_margin = params.beta - max_entry;
  rep.growth_ok = max_entry <= params.beta + 1e-14;

  // Monotonicity and coercivity, sampled; canonical witnesses first.
  const std::array<std::array<double, 2>, 4> canon{
      {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}}};
  Rng rng(seed);
  rep.monotone_margin = 1e300;
  rep.coercive_margin = 1e300;
  const int total = std::max(n_samples, 1);
  for (int s = 0; s < total; ++s) {
    double z1, z2, e1, e2;
    if (s < static_cast<int>(canon.size())) {
      z1 = canon[s][0];
      z2 = canon[s][1];
      e1 = -z2;
      e2 = z1;
    } else {
      z1 = rng.uniform(-1.0, 1.0);
      z2 = rng.uniform(-1.0, 1.0);
      e1 = rng.uniform(-1.0, 1.0);
      e2 = rng.uniform(-1.0, 1.0);
    }
    const double wz1 = power_law(z1, p), wz2 = power_law(z2, p);
    const double we1 = power_law(e1, p), we2 = power_law(e2, p);
    const double d1 = wz1 - we1, d2 = wz2 - we2;
    const double coer_rhs = params.alpha * holder_norm_pow(z1, z2, p);
    for (int c = 0; c < g.cells(); ++c) {
      const double a11 = U.a11[c], a22 = U.a22[c], a12 = U.off(c);
      // (U (w(zeta) - w(eta)), zeta - eta)
      const double m1 = a11 * d1 + a12 * d2;
      const double m2 = a12 * d1 + a22 * d2;
      const double mono = m1 * (z1 - e1) + m2 * (z2 - e2);
      rep.monotone_margin = std::min(rep.monotone_margin, mono);
      // (U w(zeta) zeta, zeta) - alpha |zeta|_p^p
      const double c1 = a11 * wz1 + a12 * wz2;
      const double c2 = a12 * wz1 + a22 * wz2;
      const double coer = c1 * z1 + c2 * z2 - coer_rhs;
      rep.coercive_margin = std::min(rep.coercive_margin, coer);
    }
  }
  rep.monotone_ok = rep.monotone_margin >= -1e-10;
  rep.coercive_ok = rep.coercive_margin >= -1e-10;
  return rep;
}

RowDivergence row_divergence(const ControlField& U) {
  const GridSpec& g = U.grid;
  const double h = g.h();
  RowDivergence dv{zero_nodes(g), zero_nodes(g)};
  // Weak divergence density at node n: -(1/h^2) * sum_cells (v, grad hat_n) h^2,
  // with the solver's forward differences: D1 on the cell's bottom edge,
  // D2 on its left edge.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double w1 = 0.0, w2 = 0.0;
      // D1 terms: cells (i-1, j) and (i, j), valid when inside cell range.
      if (j < g.ny - 1) {
        if (i > 0) {
          const int c = g.cell(i - 1, j);
          w1 += U.a11[c] / h;
          w2 += U.off(c) / h;
        }
        if (i < g.nx - 1) {
          const int c = g.cell(i, j);
          w1 -= U.a11[c] / h;
          w2 -= U.off(c) / h;
        }
      }
      // D2 terms: cells (i, j-1) and (i, j).
      if (i < g.nx - 1) {
        if (j > 0) {
          const int c = g.cell(i, j - 1);
          w1 += U.off(c) / h;
          w2 += U.a22[c] / h;
        }
        if (j < g.ny - 1) {
          const int c = g.cell(i, j);
          w1 -= U.off(c) / h;
          w2 -= U.a22[c] / h;
        }
      }
      const int n = g.node(i, j);
      dv.row1[n] = -w1;
      dv.row2[n] = -w2;
    }
  }
  return dv;
}

std::string control_to_json(const ControlField& U, const ClassParams& params) {
  nlohmann::json j;
  j["form"] = U.diagonal() ? "diagonal" : "symmetric";
  j["grid"] = {{"nx", U.grid.nx}, {"ny", U.grid.ny}};
  j["params"] = {{"p", params.p}, {"alpha", params.alpha}, {"beta", params.beta}};
  if (U.profiles.has_value()) {
    j["profile_a11_of_x2"] = U.profiles->a11_of_x2;
    j["profile_a22_of_x1"] = U.profiles->a22_of_x1;
  } else {
    j["a11"] = U.a11;
    j["a22"] = U.a22;
    if (!U.a12.empty()) j["a12"] = U.a12;
  }
  return j.dump(2);
}

void write_control_binary(const ControlField& U, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw LabError("write_control_binary: cannot open " + path);
  for (int c = 0; c < U.grid.cells(); ++c) {
    const double vals[4] = {U.a11[c], U.off(c), U.off(c), U.a22[c]};
    std::fwrite(vals, sizeof(double), 4, fp);
  }
  std::fclose(fp);
}

}  // namespace lab
