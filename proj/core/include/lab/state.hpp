#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lab/control.hpp"
#include "lab/domain.hpp"
#include "lab/grid.hpp"

namespace lab {

struct SolverOptions {
  /// Bound on the pointwise equation residual max |r_n| / h^2, scaled by
  /// max(1, ||f||_inf); the hat-tested weak residual carries the h^2.
  double tolerance = 1e-9;
  int max_iterations = 50000;
  double damping = 1.0;      // initial Picard mixing weight
  double newton_inner_rtol = 1e-2;  // relative tolerance of the inner linear solve
  /// Optional nodal initial guess (zeroed outside the domain). Empty = zeros.
  NodeField initial_guess;
};

struct SolverStats {
  int iterations = 0;
  double residual_norm = 0.0;  // final pointwise residual, max |r_n| / h^2
  std::string method;          // "cg", "newton", "picard"
  std::vector<double> energy_log;  // Newton path only
};

/// Nodal state with the zero extension built in: values are exactly zero at
/// every node outside the domain mask.
struct StateField {
  GridSpec grid;
  GridDomain domain;
  NodeField values;
  SolverStats stats;
};

struct EllipticProblem {
  ControlField U;
  NodeField f;  // grid-sampled forcing over D
  GridDomain domain;
  ClassParams params;
  SolverOptions options;
};

/// Discrete W^{1,p}_0 norm over the box:
/// (h^2 sum_cells (|D1 y|^p + |D2 y|^p) + h^2 sum_nodes |y|^p)^(1/p),
/// with D1/D2 the forward differences on the cell's bottom/left edges.
/// Zero extension makes the same formula serve the subdomain and D.
double wp_norm(const GridSpec& grid, const NodeField& y, double p);

/// Norm weighted by the control, used as the equivalent norm in the
/// convergence checks: replaces |D y|^p by (U [Dy^{p-2}] Dy, Dy) cellwise.
double u_weighted_norm(const ControlField& U, const NodeField& y, double p);

/// Applies the discrete monotone operator (the weak form without forcing):
/// out_n = sum_cells (U [(Dy)^{p-2}] Dy, D hat_n) h^2 + h^2 |y_n|^{p-2} y_n
/// at domain nodes; zero elsewhere. This defines the discrete operator the
/// monotonicity and coercivity probes pair against.
NodeField apply_operator(const ControlField& U, const GridDomain& domain,
                         const NodeField& y, double p);

/// Weak-form residual tested against nodal hat functions:
/// apply_operator(y) - h^2 f at domain nodes, zero at all others.
NodeField assemble_residual(const EllipticProblem& prob, const NodeField& y);

/// Potential of the diagonal-coefficient operator; its gradient is
/// assemble_residual. Throws UnsupportedFormError for non-diagonal U.
double energy(const EllipticProblem& prob, const NodeField& y);

/// Solves the discrete Dirichlet problem. p = 2 uses one conjugate-gradient
/// solve; p > 2 with diagonal U uses damped Newton on the energy (gradient
/// fallback); p > 2 with symmetric U uses Picard iteration on frozen
/// weights. Deterministic: identical inputs produce bit-identical output.
StateField solve_state(const EllipticProblem& prob);

/// A priori bound wp_norm(y)^p <= C ||f||_q^q with the Young-inequality
/// constant C = (2/(q m)) (p m / 2)^(-q/p), m = min(alpha, 1). The paper
/// states only that such a constant exists; this is the documented choice.
struct AprioriReport {
  double lhs = 0.0;     // wp_norm(y)^p
  double rhs = 0.0;     // C ||f||_q^q
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};
AprioriReport apriori_check(const StateField& y, const NodeField& f,
                            const ClassParams& params);

/// CSV (x,y,value) and little-endian f64 row-major exports.
void write_state_csv(const StateField& y, const std::string& path);
void write_field_binary(const NodeField& v, const std::string& path);

}  // namespace lab
