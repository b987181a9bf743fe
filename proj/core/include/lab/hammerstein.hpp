#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lab/domain.hpp"
#include "lab/grid.hpp"
#include "lab/state.hpp"

namespace lab {

/// Linear positive kernel operator. gaussian_ridge gives
/// (B w)_i = scale * h^2 * sum_j exp(-|x_i - x_j|^2 / (2 sigma^2)) w_j + ridge * w_i
/// with sums over domain nodes only; ridge > 0 makes B symmetric positive
/// definite, so a (right) inverse exists. scaled_identity is the scale = 0
/// special case.
struct KernelSpec {
  enum class Kind { gaussian_ridge, scaled_identity };
  Kind kind = Kind::gaussian_ridge;
  double sigma = 0.15;
  double scale = 1.0;
  double ridge = 0.5;
};

void validate(const KernelSpec& k);

/// Matrix-free kernel application; deterministic (fixed row-then-column
/// summation order via the separable factorization of the Gaussian).
NodeField apply_B(const KernelSpec& k, const NodeField& w, const GridDomain& domain);

/// Solves B u = w on the domain nodes (B is SPD).
NodeField solve_B(const KernelSpec& k, const NodeField& w, const GridDomain& domain,
                  double tol, int max_iter);

/// The concrete superposition operator F(y, z) = |y|^{p-2} y + |z|^{p-2} z,
/// evaluated pointwise on domain nodes.
NodeField eval_F(const NodeField& y, const NodeField& z, double p,
                 const GridDomain& domain);

struct HammersteinOptions {
  double tolerance = 1e-9;  // on max |z + B F(y,z) - g|
  int max_iterations = 100;
  std::uint64_t seed = 0;   // reserved for callers that log it
};

/// Result of one solve. The solution bound lambda and the energy-identity
/// defect are computed on every solve so the invariants can be asserted
/// wholesale.
struct HammersteinSolution {
  NodeField z;
  double residual_norm = 0.0;
  int newton_iters = 0;
  /// Max-norm distance between the solutions reached from z0 = 0 and z0 = g.
  double uniqueness_gap = 0.0;
  /// Computable norm bound: ||z||_p <= lambda with
  /// lambda = (||y||_p^{p-1} + ||B^{-1} g||_q)^{1/(p-1)}, from pairing the
  /// equation with z exactly as in the positivity argument.
  double lambda_bound = 0.0;
  double z_lp_norm = 0.0;
  /// Relative defect of <F,z> + <F,BF> = <F,g> at the solution.
  double energy_identity_defect = 0.0;
};

/// Damped Newton on R(z) = z + B F(y,z) - g with Jacobian
/// I + B diag((p-1)|z|^{p-2}); nonsingular because B is PD and the diagonal
/// is PSD. Falls back to damped fixed-point steps if the inner solve fails.
/// The uniqueness gap is measured by re-solving from z0 = g.
HammersteinSolution solve_hammerstein(const StateField& y, const NodeField& g,
                                      const KernelSpec& k, double p,
                                      const HammersteinOptions& opts = {});

/// Scalar root of t + ridge * |t|^{p-2} t = target for target >= 0; the 1-D
/// bound oracle used by the scalar tests (exact for scaled_identity, y = 0).
double scalar_hammerstein_root(double ridge, double p, double target);

/// Seeded check of the strict-monotonicity lower bound
/// <F(y,z1) - F(y,z2), z1 - z2> >= 2^{2-p} ||z1 - z2||_p^p.
struct MonotonicityReport {
  int pairs = 0;
  double worst_margin = 0.0;  // min over pairs of lhs - rhs
  bool pass = false;
  /// The relaxed-monotonicity modulus is identically zero for this F, so
  /// the semibounded-variation property holds with infimum 0.
  bool usbv_satisfied_by_monotonicity = true;
};
MonotonicityReport monotonicity_probe(const NodeField& y, int pairs, double p,
                                      const GridDomain& domain, std::uint64_t seed);

/// Discrete surrogate of the convergence-transfer properties along supplied
/// finite sequences. Verdicts concern only these sequences.
struct MaPropertyReport {
  std::vector<double> pairings;     // <F(y_k, z_k), z_k>
  double limit_pairing = 0.0;       // <F(y, z), z>
  bool a_property_pass = false;     // last-quarter min >= limit - tol
  bool m_hypothesis_triggered = false;  // pairing converged within tol
  bool m_property_pass = false;     // implied strong convergence observed
  bool m_vacuous = false;           // hypothesis not triggered
  double final_z_gap = 0.0;         // ||z_k - z||_p at the last element
};
MaPropertyReport ma_property_probe(std::span<const NodeField> y_seq,
                                   std::span<const NodeField> z_seq,
                                   const NodeField& y_limit, const NodeField& z_limit,
                                   double p, const GridDomain& domain, double tol);

}  // namespace lab
