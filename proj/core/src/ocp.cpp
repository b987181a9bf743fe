#include "lab/ocp.hpp"

#include <algorithm>
#include <cmath>

#include "lab/errors.hpp"
#include "lab/krylov.hpp"
#include "lab/parallel.hpp"

#include "json.hpp"

namespace lab {

namespace {

int block_of(int line, int lines, int blocks) {
  return static_cast<int>((static_cast<long long>(line) * blocks) / lines);
}

void expand_profiles(const std::vector<double>& params_vec, const OcpProblem& prob,
                     std::vector<double>& profile1, std::vector<double>& profile2) {
  const int rows = prob.domain.grid.ny - 1;
  const int cols = prob.domain.grid.nx - 1;
  profile1.resize(rows);
  profile2.resize(cols);
  for (int j = 0; j < rows; ++j) profile1[j] = params_vec[block_of(j, rows, prob.n1)];
  for (int i = 0; i < cols; ++i) {
    profile2[i] = params_vec[prob.n1 + block_of(i, cols, prob.n2)];
  }
}

std::vector<double> clamp_to_box(const std::vector<double>& x, const ParamBox& box) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = std::clamp(x[k], box.lo[k], box.hi[k]);
  }
  return out;
}

}  // namespace

void validate(const OcpProblem& prob) {
  validate(prob.domain);
  validate(prob.params, prob.domain.grid);
  validate(prob.kernel);
  const int rows = prob.domain.grid.ny - 1;
  const int cols = prob.domain.grid.nx - 1;
  if (prob.n1 < 1 || prob.n1 > rows || prob.n2 < 1 || prob.n2 > cols) {
    throw ConfigError({"control parametrization: n1 must lie in [1, ny-1] and n2 "
                       "in [1, nx-1]"});
  }
  const auto nodes = static_cast<std::size_t>(prob.domain.grid.nodes());
  if (prob.f.size() != nodes || prob.g.size() != nodes || prob.z_d.size() != nodes) {
    throw ConfigError({"problem data f, g, z_d must be nodal fields on the grid"});
  }
  auto finite = [](const NodeField& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!finite(prob.f) || !finite(prob.g) || !finite(prob.z_d)) {
    throw ConfigError({"problem data f, g, z_d must be finite"});
  }
  const ParamBox box = param_box(prob);
  for (std::size_t k = 0; k < box.lo.size(); ++k) {
    if (box.lo[k] > box.hi[k]) {
      throw InfeasibleControlError("OcpProblem: empty feasible box in parameter " +
                                   std::to_string(k));
    }
  }
}

ParamBox param_box(const OcpProblem& prob) {
  const GridSpec& g = prob.domain.grid;
  const int rows = g.ny - 1, cols = g.nx - 1;
  ParamBox box;
  box.lo.assign(prob.n1 + prob.n2, -1e300);
  box.hi.assign(prob.n1 + prob.n2, 1e300);
  for (int j = 0; j < rows; ++j) {
    const int k = block_of(j, rows, prob.n1);
    for (int i = 0; i < cols; ++i) {
      const FeasibleBox fb = diagonal_feasible_box(prob.params, g.cell(i, j));
      box.lo[k] = std::max(box.lo[k], fb.lo);
      box.hi[k] = std::min(box.hi[k], fb.hi);
    }
  }
  for (int i = 0; i < cols; ++i) {
    const int k = prob.n1 + block_of(i, cols, prob.n2);
    for (int j = 0; j < rows; ++j) {
      const FeasibleBox fb = diagonal_feasible_box(prob.params, g.cell(i, j));
      box.lo[k] = std::max(box.lo[k], fb.lo);
      box.hi[k] = std::min(box.hi[k], fb.hi);
    }
  }
  return box;
}

double eval_cost(const NodeField& z, const NodeField& z_d, double p,
                 const GridDomain& domain) {
  const GridSpec& g = domain.grid;
  const double h2 = g.h() * g.h();
  double s = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    if (domain.mask[n]) s += std::pow(std::abs(z[n] - z_d[n]), p);
  }
  return h2 * s;
}

ForwardSolve reduced_objective(const std::vector<double>& params_vec,
                               const OcpProblem& prob) {
  if (static_cast<int>(params_vec.size()) != prob.n1 + prob.n2) {
    throw ConfigError({"reduced_objective: parameter vector has wrong size"});
  }
  const auto nodes = static_cast<std::size_t>(prob.domain.grid.nodes());
  if (prob.f.size() != nodes || prob.g.size() != nodes || prob.z_d.size() != nodes) {
    throw ConfigError({"reduced_objective: f, g, z_d must be nodal fields"});
  }
  ForwardSolve fs;
  std::vector<double> profile1, profile2;
  expand_profiles(params_vec, prob, profile1, profile2);
  try {
    fs.U = make_diagonal_control(profile1, profile2, prob.domain.grid, prob.params);
    EllipticProblem ep{fs.U, prob.f, prob.domain, prob.params, prob.state_options};
    fs.y = solve_state(ep);
    fs.z = solve_hammerstein(fs.y, prob.g, prob.kernel, prob.params.p,
                             prob.ham_options);
  } catch (const LabError& err) {
    std::string at = "[";
    for (std::size_t k = 0; k < params_vec.size(); ++k) {
      at += (k ? "," : "") + std::to_string(params_vec[k]);
    }
    throw SolverError("forward solve failed at params " + at + "]: " + err.what(),
                      0.0, 0);
  }
  fs.value = eval_cost(fs.z.z, prob.z_d, prob.params.p, prob.domain);
  return fs;
}

FdGradient fd_gradient(const std::vector<double>& params_vec, const OcpProblem& prob,
                       double step) {
  const int dim = static_cast<int>(params_vec.size());
  const ParamBox box = param_box(prob);
  FdGradient out;
  out.g.assign(dim, 0.0);
  std::vector<std::uint8_t> flags(dim, 0);
  const int threads = resolve_threads(prob.optimizer.threads);

  // Base value is only needed for one-sided stencils; compute lazily but
  // deterministically by always evaluating it (cheap relative to 2*dim).
  const double base = reduced_objective(params_vec, prob).value;

  parallel_for(dim, threads, [&](int k) {
    std::vector<double> xp = params_vec, xm = params_vec;
    const bool can_up = params_vec[k] + step <= box.hi[k];
    const bool can_dn = params_vec[k] - step >= box.lo[k];
    if (can_up && can_dn) {
      xp[k] += step;
      xm[k] -= step;
      const double fp = reduced_objective(xp, prob).value;
      const double fm = reduced_objective(xm, prob).value;
      out.g[k] = (fp - fm) / (2.0 * step);
    } else if (can_up) {
      xp[k] += step;
      const double fp = reduced_objective(xp, prob).value;
      out.g[k] = (fp - base) / step;
      flags[k] = 1;
    } else if (can_dn) {
      xm[k] -= step;
      const double fm = reduced_objective(xm, prob).value;
      out.g[k] = (base - fm) / step;
      flags[k] = 1;
    } else {
      out.g[k] = 0.0;  // box is a point in this coordinate
      flags[k] = 1;
    }
  });
  for (int k = 0; k < dim; ++k) out.one_sided_used |= (flags[k] != 0);
  return out;
}

std::vector<double> adjoint_gradient_p2(const std::vector<double>& params_vec,
                                        const OcpProblem& prob) {
  if (prob.params.p != 2.0) {
    throw UnsupportedFormError("adjoint_gradient_p2: requires p = 2");
  }
  const GridSpec& grid = prob.domain.grid;
  const GridDomain& dom = prob.domain;
  const double h = grid.h();
  const double h2 = h * h;

  const ForwardSolve fs = reduced_objective(params_vec, prob);
  const NodeField& y = fs.y.values;
  const NodeField& z = fs.z.z;

  // Cost adjoint through the affine Hammerstein map (I + B) z = g - B y.
  NodeField dJdz = zero_nodes(grid);
  for (int n = 0; n < grid.nodes(); ++n) {
    if (dom.mask[n]) dJdz[n] = 2.0 * h2 * (z[n] - prob.z_d[n]);
  }
  auto apply_IB = [&](const NodeField& v, NodeField& av) {
    av = apply_B(prob.kernel, v, dom);
    for (int n = 0; n < grid.nodes(); ++n) {
      av[n] += dom.mask[n] ? v[n] : 0.0;
    }
  };
  NodeField lambda_z = zero_nodes(grid);
  KrylovResult kr1 = conjugate_gradient(apply_IB, dJdz, lambda_z,
                                        1e-12 * std::max(1.0, norm2(dJdz)), 20000);
  if (!kr1.converged) {
    throw SolverError("adjoint_gradient_p2: Hammerstein adjoint solve failed",
                      kr1.residual_norm, kr1.iterations);
  }

  // State adjoint: A_h lambda_y = -B lambda_z (A_h symmetric at p = 2).
  NodeField rhs = apply_B(prob.kernel, lambda_z, dom);
  for (double& v : rhs) v = -v;
  auto apply_A = [&](const NodeField& v, NodeField& av) {
    av = apply_operator(fs.U, dom, v, 2.0);
  };
  NodeField lambda_y = zero_nodes(grid);
  KrylovResult kr2 = conjugate_gradient(apply_A, rhs, lambda_y,
                                        1e-12 * std::max(1.0, norm2(rhs)), 50000);
  if (!kr2.converged) {
    throw SolverError("adjoint_gradient_p2: state adjoint solve failed",
                      kr2.residual_norm, kr2.iterations);
  }

  // dJ/da11(cell) = -h^2 D1 y D1 lambda, dJ/da22(cell) = -h^2 D2 y D2 lambda,
  // accumulated over each profile block.
  std::vector<double> grad(prob.n1 + prob.n2, 0.0);
  const int rows = grid.ny - 1, cols = grid.nx - 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const double d1y = (y[grid.node(i + 1, j)] - y[grid.node(i, j)]) / h;
      const double d2y = (y[grid.node(i, j + 1)] - y[grid.node(i, j)]) / h;
      const double d1l = (lambda_y[grid.node(i + 1, j)] - lambda_y[grid.node(i, j)]) / h;
      const double d2l = (lambda_y[grid.node(i, j + 1)] - lambda_y[grid.node(i, j)]) / h;
      grad[block_of(j, rows, prob.n1)] -= h2 * d1y * d1l;
      grad[prob.n1 + block_of(i, cols, prob.n2)] -= h2 * d2y * d2l;
    }
  }
  return grad;
}

namespace {

std::vector<double> compute_gradient(const std::vector<double>& x,
                                     const OcpProblem& prob, bool& used_fd) {
  using Mode = OptimizerOptions::GradientMode;
  const Mode mode = prob.optimizer.gradient;
  if (mode == Mode::adjoint ||
      (mode == Mode::automatic && prob.params.p == 2.0)) {
    used_fd = false;
    return adjoint_gradient_p2(x, prob);
  }
  used_fd = true;
  return fd_gradient(x, prob, prob.optimizer.fd_step).g;
}

}  // namespace

OcpResult optimize(const OcpProblem& prob) {
  validate(prob);
  const ParamBox box = param_box(prob);
  const int dim = prob.n1 + prob.n2;

  std::vector<double> x(dim);
  if (!prob.initial.empty()) {
    if (static_cast<int>(prob.initial.size()) != dim) {
      throw ConfigError({"optimizer initial point has wrong size"});
    }
    x = clamp_to_box(prob.initial, box);
  } else {
    for (int k = 0; k < dim; ++k) x[k] = 0.5 * (box.lo[k] + box.hi[k]);
  }

  OcpResult res;
  ForwardSolve best = reduced_objective(x, prob);
  res.objective_evaluations = 1;
  res.iterate_values.push_back(best.value);
  res.params = x;

  double step = prob.optimizer.initial_step;
  for (int it = 0; it < prob.optimizer.max_iterations; ++it) {
    bool used_fd = false;
    const std::vector<double> grad = compute_gradient(x, prob, used_fd);
    if (used_fd) res.objective_evaluations += 2 * dim;

    std::vector<double> pg(dim);
    double kkt = 0.0;
    for (int k = 0; k < dim; ++k) {
      pg[k] = x[k] - std::clamp(x[k] - grad[k], box.lo[k], box.hi[k]);
      kkt = std::max(kkt, std::abs(pg[k]));
    }
    res.kkt_residual = kkt;
    if (kkt <= prob.optimizer.tolerance) break;

    bool accepted = false;
    double t = step;
    while (t >= 1e-14) {
      std::vector<double> trial(dim);
      double decrease_model = 0.0;
      for (int k = 0; k < dim; ++k) {
        trial[k] = std::clamp(x[k] - t * grad[k], box.lo[k], box.hi[k]);
        decrease_model += grad[k] * (x[k] - trial[k]);
      }
      if (decrease_model <= 0.0) break;  // projection killed the direction
      ForwardSolve fsr = reduced_objective(trial, prob);
      ++res.objective_evaluations;
      if (fsr.value <= best.value - 1e-4 * decrease_model) {
        x = trial;
        best = std::move(fsr);
        res.iterate_values.push_back(best.value);
        res.params = x;
        accepted = true;
        step = t * 2.0;  // allow growth after success
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
  }

  res.U_opt = std::move(best.U);
  res.y_opt = std::move(best.y);
  res.z_opt = std::move(best.z);
  res.value = best.value;
  return res;
}

OcpResult brute_force_small(const OcpProblem& prob, int resolution) {
  validate(prob);
  const int dim = prob.n1 + prob.n2;
  if (dim > 3) {
    throw ConfigError({"brute_force_small: reduced dimension must be <= 3"});
  }
  if (resolution < 1 || resolution > 64) {
    throw ConfigError({"brute_force_small: resolution must lie in [1, 64]"});
  }
  const ParamBox box = param_box(prob);

  std::vector<double> x(dim, 0.0);
  OcpResult res;
  bool have_best = false;
  ForwardSolve best;
  std::vector<double> best_x;

  std::vector<int> idx(dim, 0);
  while (true) {
    for (int k = 0; k < dim; ++k) {
      const double t = resolution == 1 ? 0.0
                                       : static_cast<double>(idx[k]) / (resolution - 1);
      x[k] = box.lo[k] + t * (box.hi[k] - box.lo[k]);
    }
    ForwardSolve fs = reduced_objective(x, prob);
    ++res.objective_evaluations;
    if (!have_best || fs.value < best.value) {
      best = std::move(fs);
      best_x = x;
      have_best = true;
    }
    int k = 0;
    while (k < dim && ++idx[k] == resolution) {
      idx[k] = 0;
      ++k;
    }
    if (k == dim) break;
  }

  res.U_opt = std::move(best.U);
  res.y_opt = std::move(best.y);
  res.z_opt = std::move(best.z);
  res.value = best.value;
  res.params = best_x;
  res.iterate_values.push_back(res.value);
  return res;
}

std::string ocp_result_to_json(const OcpResult& r) {
  nlohmann::json j;
  j["value"] = r.value;
  j["kkt_residual"] = r.kkt_residual;
  j["stalled"] = r.stalled;
  j["objective_evaluations"] = r.objective_evaluations;
  j["params"] = r.params;
  j["iterate_values"] = r.iterate_values;
  j["state_residual"] = r.y_opt.stats.residual_norm;
  j["hammerstein_residual"] = r.z_opt.residual_norm;
  j["hammerstein_uniqueness_gap"] = r.z_opt.uniqueness_gap;
  return j.dump(2);
}

}  // namespace lab
