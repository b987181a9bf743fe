#include "lab/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lab/errors.hpp"
#include "lab/krylov.hpp"

namespace lab {

namespace {

inline double power_law(double t, double p) {
  if (t == 0.0) return 0.0;
  return std::pow(std::abs(t), p - 2.0) * t;
}

// Regularized weight |t|^{p-2} -> (t^2 + mu^2)^{(p-2)/2}; used inside the
// Newton Jacobian only, the residual stays unregularized.
inline double reg_weight(double t, double p, double mu) {
  return std::pow(t * t + mu * mu, 0.5 * (p - 2.0));
}

constexpr double kJacobianMu = 1e-8;

struct Stencil {
  const GridSpec& g;
  const GridDomain& dom;
  double h, h2;

  explicit Stencil(const GridDomain& d)
      : g(d.grid), dom(d), h(d.grid.h()), h2(d.grid.h() * d.grid.h()) {}

  bool in(int i, int j) const { return dom.mask[g.node(i, j)] != 0; }
};

void zero_outside(const GridDomain& dom, NodeField& v) {
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!dom.mask[n]) v[n] = 0.0;
  }
}

}  // namespace

double wp_norm(const GridSpec& grid, const NodeField& y, double p) {
  const double h = grid.h();
  const double h2 = h * h;
  double grad_sum = 0.0;
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const double d1 = (y[grid.node(i + 1, j)] - y[grid.node(i, j)]) / h;
      const double d2 = (y[grid.node(i, j + 1)] - y[grid.node(i, j)]) / h;
      grad_sum += std::pow(std::abs(d1), p) + std::pow(std::abs(d2), p);
    }
  }
  double mass_sum = 0.0;
  for (double v : y) mass_sum += std::pow(std::abs(v), p);
  return std::pow(h2 * (grad_sum + mass_sum), 1.0 / p);
}

double u_weighted_norm(const ControlField& U, const NodeField& y, double p) {
  const GridSpec& grid = U.grid;
  const double h = grid.h();
  const double h2 = h * h;
  double grad_sum = 0.0;
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const int c = grid.cell(i, j);
      const double d1 = (y[grid.node(i + 1, j)] - y[grid.node(i, j)]) / h;
      const double d2 = (y[grid.node(i, j + 1)] - y[grid.node(i, j)]) / h;
      const double w1 = power_law(d1, p), w2 = power_law(d2, p);
      grad_sum += U.a11[c] * w1 * d1 + U.a22[c] * w2 * d2 +
                  U.off(c) * (w1 * d2 + w2 * d1);
    }
  }
  double mass_sum = 0.0;
  for (double v : y) mass_sum += std::pow(std::abs(v), p);
  return std::pow(h2 * grad_sum + h2 * mass_sum, 1.0 / p);
}

NodeField apply_operator(const ControlField& U, const GridDomain& domain,
                         const NodeField& y, double p) {
  const GridSpec& g = domain.grid;
  const double h = g.h();
  const double h2 = h * h;
  NodeField out = zero_nodes(g);

  // Flux per cell, then scatter to the two nodes of each difference edge.
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int c = g.cell(i, j);
      const double d1 = (y[g.node(i + 1, j)] - y[g.node(i, j)]) / h;
      const double d2 = (y[g.node(i, j + 1)] - y[g.node(i, j)]) / h;
      const double w1 = power_law(d1, p), w2 = power_law(d2, p);
      const double q1 = U.a11[c] * w1 + U.off(c) * w2;  // flux against D1 v
      const double q2 = U.off(c) * w1 + U.a22[c] * w2;  // flux against D2 v
      // D1 hat_n is +1/h at node (i+1, j) and -1/h at (i, j).
      out[g.node(i + 1, j)] += h * q1;
      out[g.node(i, j)] -= h * q1;
      out[g.node(i, j + 1)] += h * q2;
      out[g.node(i, j)] -= h * q2;
    }
  }
  for (int n = 0; n < g.nodes(); ++n) {
    out[n] += h2 * power_law(y[n], p);
  }
  zero_outside(domain, out);
  return out;
}

NodeField assemble_residual(const EllipticProblem& prob, const NodeField& y) {
  NodeField r = apply_operator(prob.U, prob.domain, y, prob.params.p);
  const double h2 = prob.domain.grid.h() * prob.domain.grid.h();
  for (std::size_t n = 0; n < r.size(); ++n) {
    if (prob.domain.mask[n]) r[n] -= h2 * prob.f[n];
  }
  return r;
}

double energy(const EllipticProblem& prob, const NodeField& y) {
  if (!prob.U.diagonal()) {
    throw UnsupportedFormError("energy: defined for diagonal controls only");
  }
  const GridSpec& g = prob.domain.grid;
  const double h = g.h();
  const double h2 = h * h;
  const double p = prob.params.p;
  double grad_sum = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int c = g.cell(i, j);
      const double d1 = (y[g.node(i + 1, j)] - y[g.node(i, j)]) / h;
      const double d2 = (y[g.node(i, j + 1)] - y[g.node(i, j)]) / h;
      grad_sum += prob.U.a11[c] * std::pow(std::abs(d1), p) +
                  prob.U.a22[c] * std::pow(std::abs(d2), p);
    }
  }
  double mass_sum = 0.0, load_sum = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    mass_sum += std::pow(std::abs(y[n]), p);
    if (prob.domain.mask[n]) load_sum += prob.f[n] * y[n];
  }
  return h2 * (grad_sum + mass_sum) / p - h2 * load_sum;
}

namespace {

// Jacobian action of the diagonal-coefficient residual at linearization
// point y, with regularized weights. SPD, so CG applies.
void apply_jacobian(const ControlField& U, const GridDomain& dom, const NodeField& y,
                    double p, const NodeField& v, NodeField& out) {
  const GridSpec& g = dom.grid;
  const double h = g.h();
  const double h2 = h * h;
  std::fill(out.begin(), out.end(), 0.0);
  NodeField vin = v;
  for (std::size_t n = 0; n < vin.size(); ++n) {
    if (!dom.mask[n]) vin[n] = 0.0;
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int c = g.cell(i, j);
      const double d1y = (y[g.node(i + 1, j)] - y[g.node(i, j)]) / h;
      const double d2y = (y[g.node(i, j + 1)] - y[g.node(i, j)]) / h;
      const double d1v = (vin[g.node(i + 1, j)] - vin[g.node(i, j)]) / h;
      const double d2v = (vin[g.node(i, j + 1)] - vin[g.node(i, j)]) / h;
      const double w1 = (p - 1.0) * U.a11[c] * reg_weight(d1y, p, kJacobianMu);
      const double w2 = (p - 1.0) * U.a22[c] * reg_weight(d2y, p, kJacobianMu);
      const double q1 = w1 * d1v;
      const double q2 = w2 * d2v;
      out[g.node(i + 1, j)] += h * q1;
      out[g.node(i, j)] -= h * q1;
      out[g.node(i, j + 1)] += h * q2;
      out[g.node(i, j)] -= h * q2;
    }
  }
  for (int n = 0; n < g.nodes(); ++n) {
    out[n] += h2 * (p - 1.0) * reg_weight(y[n], p, kJacobianMu) * vin[n];
  }
  for (int n = 0; n < g.nodes(); ++n) {
    if (!dom.mask[n]) out[n] = 0.0;
  }
}

// Unit-weight linearization of the operator: same coefficients, power
// weights replaced by 1. Used to produce a nondegenerate starting point for
// the p > 2 iterations (at y = 0 the true weights vanish and Newton steps
// blow up in scale).
void apply_linearized(const ControlField& U, const GridDomain& dom,
                      const NodeField& v, NodeField& out) {
  const GridSpec& g = dom.grid;
  const double h = g.h();
  const double h2 = h * h;
  std::fill(out.begin(), out.end(), 0.0);
  NodeField vin = v;
  for (std::size_t n = 0; n < vin.size(); ++n) {
    if (!dom.mask[n]) vin[n] = 0.0;
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int c = g.cell(i, j);
      const double d1v = (vin[g.node(i + 1, j)] - vin[g.node(i, j)]) / h;
      const double d2v = (vin[g.node(i, j + 1)] - vin[g.node(i, j)]) / h;
      const double q1 = U.a11[c] * d1v + U.off(c) * d2v;
      const double q2 = U.off(c) * d1v + U.a22[c] * d2v;
      out[g.node(i + 1, j)] += h * q1;
      out[g.node(i, j)] -= h * q1;
      out[g.node(i, j + 1)] += h * q2;
      out[g.node(i, j)] -= h * q2;
    }
  }
  for (int n = 0; n < g.nodes(); ++n) out[n] += h2 * vin[n];
  for (int n = 0; n < g.nodes(); ++n) {
    if (!dom.mask[n]) out[n] = 0.0;
  }
}

bool is_zero(const NodeField& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

// Linear operator with weights frozen at y_freeze (Picard); handles the
// non-diagonal coupling, hence nonsymmetric in general.
void apply_frozen(const ControlField& U, const GridDomain& dom,
                  const NodeField& y_freeze, double p, const NodeField& v,
                  NodeField& out) {
  const GridSpec& g = dom.grid;
  const double h = g.h();
  const double h2 = h * h;
  std::fill(out.begin(), out.end(), 0.0);
  NodeField vin = v;
  for (std::size_t n = 0; n < vin.size(); ++n) {
    if (!dom.mask[n]) vin[n] = 0.0;
  }
  const double floor_w = 1e-10;  // keeps the frozen operator invertible
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int c = g.cell(i, j);
      const double d1y = (y_freeze[g.node(i + 1, j)] - y_freeze[g.node(i, j)]) / h;
      const double d2y = (y_freeze[g.node(i, j + 1)] - y_freeze[g.node(i, j)]) / h;
      const double w1 = std::max(std::pow(std::abs(d1y), p - 2.0), floor_w);
      const double w2 = std::max(std::pow(std::abs(d2y), p - 2.0), floor_w);
      const double d1v = (vin[g.node(i + 1, j)] - vin[g.node(i, j)]) / h;
      const double d2v = (vin[g.node(i, j + 1)] - vin[g.node(i, j)]) / h;
      const double q1 = U.a11[c] * w1 * d1v + U.off(c) * w2 * d2v;
      const double q2 = U.off(c) * w1 * d1v + U.a22[c] * w2 * d2v;
      out[g.node(i + 1, j)] += h * q1;
      out[g.node(i, j)] -= h * q1;
      out[g.node(i, j + 1)] += h * q2;
      out[g.node(i, j)] -= h * q2;
    }
  }
  for (int n = 0; n < g.nodes(); ++n) {
    const double w0 = std::max(std::pow(std::abs(y_freeze[n]), p - 2.0), floor_w);
    out[n] += h2 * w0 * vin[n];
  }
  for (int n = 0; n < g.nodes(); ++n) {
    if (!dom.mask[n]) out[n] = 0.0;
  }
}

}  // namespace

StateField solve_state(const EllipticProblem& prob) {
  validate(prob.domain);
  validate(prob.params, prob.domain.grid);
  // Admissibility gate. Diagonal fields have an exact criterion; general
  // symmetric fields are screened by the sampled class check.
  if (prob.U.diagonal()) {
    for (int c = 0; c < prob.domain.grid.cells(); ++c) {
      if (prob.U.a11[c] < prob.params.alpha - 1e-12 ||
          prob.U.a22[c] < prob.params.alpha - 1e-12 ||
          std::max(prob.U.a11[c], prob.U.a22[c]) > prob.params.beta + 1e-12) {
        throw InfeasibleControlError(
            "solve_state: diagonal control leaves [alpha, beta] at cell " +
            std::to_string(c));
      }
    }
  } else {
    const ClassReport gate = check_class(prob.U, prob.params, 64, 0);
    if (!gate.all_ok()) {
      throw InfeasibleControlError(
          "solve_state: symmetric control failed the sampled class check");
    }
  }
  const GridSpec& g = prob.domain.grid;
  const GridDomain& dom = prob.domain;
  const double p = prob.params.p;
  const double h2 = g.h() * g.h();

  double f_inf = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    if (!std::isfinite(prob.f[n])) throw LabError("solve_state: forcing not finite");
    if (dom.mask[n]) f_inf = std::max(f_inf, std::abs(prob.f[n]));
  }
  // The tolerance controls the pointwise equation residual; the hat-tested
  // weak residual carries an extra h^2, hence the scaling below.
  const double tol_weak = prob.options.tolerance * std::max(1.0, f_inf) * h2;

  StateField out;
  out.grid = g;
  out.domain = dom;
  out.values = prob.options.initial_guess.empty() ? zero_nodes(g)
                                                  : prob.options.initial_guess;
  zero_outside(dom, out.values);
  NodeField& y = out.values;

  NodeField rhs = zero_nodes(g);
  for (int n = 0; n < g.nodes(); ++n) {
    if (dom.mask[n]) rhs[n] = h2 * prob.f[n];
  }

  if (p == 2.0) {
    // Linear SPD system; one CG solve. 2-norm control dominates max-norm.
    auto apply = [&](const NodeField& v, NodeField& av) {
      av = apply_operator(prob.U, dom, v, 2.0);
    };
    KrylovResult kr =
        conjugate_gradient(apply, rhs, y, tol_weak, prob.options.max_iterations);
    double rmax = max_abs(assemble_residual(prob, y));
    if (rmax > tol_weak) {
      // The recurrence residual can drift from the true one near machine
      // precision; one restart re-anchors it.
      kr = conjugate_gradient(apply, rhs, y, tol_weak, prob.options.max_iterations);
      rmax = max_abs(assemble_residual(prob, y));
    }
    out.stats.method = "cg";
    out.stats.iterations = kr.iterations;
    out.stats.residual_norm = rmax / h2;
    if (rmax > tol_weak) {
      throw SolverError("solve_state: CG did not reach tolerance (residual " +
                            std::to_string(rmax / h2) + ")",
                        rmax / h2, kr.iterations);
    }
    return out;
  }

  // Nondegenerate starting point for p > 2: the unit-weight linear solve.
  if (is_zero(y)) {
    auto apply_lin = [&](const NodeField& v, NodeField& av) {
      apply_linearized(prob.U, dom, v, av);
    };
    conjugate_gradient(apply_lin, rhs, y, std::max(tol_weak, 1e-12),
                       prob.options.max_iterations);
    zero_outside(dom, y);
  }

  if (prob.U.diagonal()) {
    // Damped Newton on the strictly convex energy, gradient fallback.
    out.stats.method = "newton";
    double J = energy(prob, y);
    out.stats.energy_log.push_back(J);
    NodeField r = assemble_residual(prob, y);
    double rmax = max_abs(r);
    NodeField step(g.nodes(), 0.0), trial(g.nodes(), 0.0);
    int it = 0;
    while (rmax > tol_weak) {
      if (it >= prob.options.max_iterations) {
        throw SolverError("solve_state: Newton exceeded max iterations", rmax, it);
      }
      auto applyJ = [&](const NodeField& v, NodeField& av) {
        apply_jacobian(prob.U, dom, y, p, v, av);
      };
      std::fill(step.begin(), step.end(), 0.0);
      const double inner_tol =
          std::max(prob.options.newton_inner_rtol * norm2(r), 1e-16);
      KrylovResult kr = conjugate_gradient(applyJ, r, step, inner_tol, 4000);
      double descent = dot(r, step);
      if (!(descent > 0.0) || !kr.converged) {
        // Near-singular Jacobian system; fall back to steepest descent.
        step = r;
        descent = dot(r, r);
      }
      double t = 1.0;
      bool accepted = false;
      while (t >= 1e-22) {
        for (int n = 0; n < g.nodes(); ++n) trial[n] = y[n] - t * step[n];
        zero_outside(dom, trial);
        const double Jt = energy(prob, trial);
        // Strict decrease guards against no-op steps once t is so small
        // that the sufficient-decrease term rounds away.
        if (Jt < J && Jt <= J - 1e-4 * t * descent) {
          y = trial;
          J = Jt;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        // Near the minimum the energy decrement drops below double
        // resolution while the residual still contracts quadratically;
        // accept on residual decrease instead.
        t = 1.0;
        while (t >= 1e-22) {
          for (int n = 0; n < g.nodes(); ++n) trial[n] = y[n] - t * step[n];
          zero_outside(dom, trial);
          NodeField rt = assemble_residual(prob, trial);
          const double rt_max = max_abs(rt);
          if (rt_max < rmax) {
            y = trial;
            J = energy(prob, y);
            r = std::move(rt);
            rmax = rt_max;
            accepted = true;
            break;
          }
          t *= 0.5;
        }
        if (!accepted) {
          throw SolverError("solve_state: line search stalled", rmax, it);
        }
        out.stats.energy_log.push_back(J);
        ++it;
        continue;
      }
      out.stats.energy_log.push_back(J);
      r = assemble_residual(prob, y);
      rmax = max_abs(r);
      ++it;
    }
    out.stats.iterations = it;
    out.stats.residual_norm = rmax / h2;
    return out;
  }

  // Symmetric non-diagonal coefficients at p > 2: Picard iteration on
  // frozen weights with adaptive mixing.
  out.stats.method = "picard";
  double omega = std::clamp(prob.options.damping, 1e-3, 1.0);
  NodeField r = assemble_residual(prob, y);
  double rmax = max_abs(r);
  NodeField ynew(g.nodes(), 0.0);
  int it = 0;
  while (rmax > tol_weak) {
    if (it >= prob.options.max_iterations) {
      throw SolverError("solve_state: Picard exceeded max iterations", rmax, it);
    }
    auto applyF = [&](const NodeField& v, NodeField& av) {
      apply_frozen(prob.U, dom, y, p, v, av);
    };
    ynew = y;
    bicgstab(applyF, rhs, ynew, std::max(1e-3 * rmax, 1e-15), 4000);
    NodeField mixed(g.nodes(), 0.0);
    double trial_omega = omega;
    bool accepted = false;
    while (trial_omega >= 1e-6) {
      for (int n = 0; n < g.nodes(); ++n) {
        mixed[n] = (1.0 - trial_omega) * y[n] + trial_omega * ynew[n];
      }
      zero_outside(dom, mixed);
      NodeField rm = assemble_residual(prob, mixed);
      const double rmax_new = max_abs(rm);
      if (rmax_new < rmax || rmax_new <= tol_weak) {
        y = mixed;
        rmax = rmax_new;
        accepted = true;
        if (trial_omega == omega) omega = std::min(1.0, omega * 1.5);
        break;
      }
      trial_omega *= 0.5;
    }
    if (!accepted) {
      throw SolverError("solve_state: Picard mixing stalled", rmax, it);
    }
    omega = std::min(omega, std::max(trial_omega, 1e-6));
    ++it;
  }
  out.stats.iterations = it;
  out.stats.residual_norm = rmax / h2;
  return out;
}

AprioriReport apriori_check(const StateField& y, const NodeField& f,
                            const ClassParams& params) {
  const GridSpec& g = y.grid;
  const double p = params.p;
  const double q = params.q();
  const double m = std::min(params.alpha, 1.0);
  const double C = (2.0 / (q * m)) * std::pow(p * m / 2.0, -q / p);

  // ||f||_q over the domain nodes the load pairing actually sees.
  const double h2 = g.h() * g.h();
  double fq = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    if (y.domain.mask[n]) fq += std::pow(std::abs(f[n]), q);
  }
  const double f_norm_q = std::pow(h2 * fq, 1.0 / q);

  AprioriReport rep;
  rep.lhs = std::pow(wp_norm(g, y.values, p), p);
  rep.rhs = C * std::pow(f_norm_q, q);
  rep.margin = rep.rhs - rep.lhs;
  rep.pass = rep.lhs <= rep.rhs + 1e-12;
  return rep;
}

void write_state_csv(const StateField& y, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw LabError("write_state_csv: cannot open " + path);
  std::fprintf(fp, "x,y,value\n");
  for (int j = 0; j < y.grid.ny; ++j) {
    for (int i = 0; i < y.grid.nx; ++i) {
      std::fprintf(fp, "%.17g,%.17g,%.17g\n", y.grid.x(i), y.grid.y(j),
                   y.values[y.grid.node(i, j)]);
    }
  }
  std::fclose(fp);
}

void write_field_binary(const NodeField& v, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw LabError("write_field_binary: cannot open " + path);
  std::fwrite(v.data(), sizeof(double), v.size(), fp);
  std::fclose(fp);
}

}  // namespace lab
