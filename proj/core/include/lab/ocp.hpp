#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lab/control.hpp"
#include "lab/domain.hpp"
#include "lab/grid.hpp"
#include "lab/hammerstein.hpp"
#include "lab/state.hpp"

namespace lab {

struct OptimizerOptions {
  enum class GradientMode { automatic, finite_difference, adjoint };
  int max_iterations = 60;
  double tolerance = 1e-6;    // projected-gradient max-norm at exit
  double initial_step = 1.0;
  double fd_step = 1e-6;
  GradientMode gradient = GradientMode::automatic;
  int threads = 1;  // finite-difference coordinates may solve concurrently
};

/// Tracking problem over diagonal solenoidal controls reduced to
/// piecewise-constant axis profiles: n1 samples for a11(x2), n2 for a22(x1).
struct OcpProblem {
  GridDomain domain;
  ClassParams params;
  NodeField f, g, z_d;
  KernelSpec kernel;
  int n1 = 4;
  int n2 = 4;
  std::vector<double> initial;  // size n1+n2; empty = midpoint of the box
  SolverOptions state_options;
  HammersteinOptions ham_options;
  OptimizerOptions optimizer;
};

void validate(const OcpProblem& prob);

/// Componentwise feasible box of the reduced parameters (the tightest
/// diagonal feasible interval over the cell lines each block covers).
struct ParamBox {
  std::vector<double> lo, hi;  // size n1+n2
};
ParamBox param_box(const OcpProblem& prob);

/// Tracking cost h^2 sum_{nodes in the domain} |z - z_d|^p.
double eval_cost(const NodeField& z, const NodeField& z_d, double p,
                 const GridDomain& domain);

/// Full forward solve at one parameter vector; the triplet is returned so
/// callers can reuse it.
struct ForwardSolve {
  double value = 0.0;
  ControlField U;
  StateField y;
  HammersteinSolution z;
};
ForwardSolve reduced_objective(const std::vector<double>& params_vec,
                               const OcpProblem& prob);

/// Central finite differences; falls back to a one-sided stencil (and says
/// so) where the box leaves no room.
struct FdGradient {
  std::vector<double> g;
  bool one_sided_used = false;
};
FdGradient fd_gradient(const std::vector<double>& params_vec, const OcpProblem& prob,
                       double step);

/// Adjoint gradient for p = 2, where both state maps are linear: solves the
/// elliptic adjoint and the kernel adjoint, then reduces
/// dJ/da_ii = -h^2 (D_i y)(D_i lambda) onto the profile blocks.
/// Throws UnsupportedFormError for p != 2.
std::vector<double> adjoint_gradient_p2(const std::vector<double>& params_vec,
                                        const OcpProblem& prob);

struct OcpResult {
  ControlField U_opt;
  StateField y_opt;
  HammersteinSolution z_opt;
  double value = 0.0;
  std::vector<double> params;        // optimal reduced parameters
  std::vector<double> iterate_values;  // accepted values, nonincreasing
  double kkt_residual = 0.0;
  bool stalled = false;
  int objective_evaluations = 0;
};

/// Projected gradient descent with Armijo backtracking (c = 1e-4, halving)
/// and box projection; returns the best-seen triplet.
OcpResult optimize(const OcpProblem& prob);

/// Exhaustive tensor grid search over the feasible box; the correctness
/// oracle for desk-scale instances. Requires n1+n2 <= 3 and resolution <= 64.
OcpResult brute_force_small(const OcpProblem& prob, int resolution);

std::string ocp_result_to_json(const OcpResult& r);

}  // namespace lab
