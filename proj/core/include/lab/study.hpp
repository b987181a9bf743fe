#pragma once

#include <string>
#include <vector>

#include "lab/domain.hpp"
#include "lab/grid.hpp"
#include "lab/hammerstein.hpp"
#include "lab/ocp.hpp"

namespace lab {

struct StudyOptions {
  /// Enforce that g and z_d vanish outside the limit domain (the support
  /// hypothesis the stability theory needs).
  bool support_condition = true;
  bool warm_start = true;
  double slack = 0.05;  // tolerated relative increase between consecutive gaps
  double value_gap_threshold = 1e-2;  // relative, against the limit value
  double state_gap_threshold = 5e-2;
  int threads = 1;  // per-eps solves may run concurrently when not warm-started
};

/// Perturbation study: the same OCP template solved on the limit domain and
/// on every member of the family, with all data zero-extended over D.
struct StudySpec {
  FamilySpec family;
  /// Template problem; its domain field is replaced per member.
  OcpProblem problem;
  StudyOptions options;
};

struct StudyRecord {
  double eps = 0.0;  // 0 marks the limit record
  double value = 0.0;
  double cold_value = 0.0;  // cold-start re-verification (extreme eps only)
  double hc_dist = 0.0;
  double ekeland_dist = 0.0;
  double state_gap = 0.0;  // wp-norm over D of the zero-extended difference
  double z_gap = 0.0;      // L^p over D
  double kkt_residual = 0.0;
  double runtime_seconds = 0.0;
  /// Reduced parameters of the optimal control; with the template's n1/n2
  /// they reconstruct the full field, which is how checkpoints are written.
  std::vector<double> optimal_params;
};

struct StudyResult {
  std::vector<StudyRecord> records;  // decreasing eps
  StudyRecord limit_record;
  bool value_convergence = false;
  double final_value_gap_rel = 0.0;
  /// Set only for monotone families with every member containing the limit:
  /// the realizing-sequence direction, final (I_eps - I_0) <= slack * scale.
  bool superset_family = false;
  bool realizing_direction_ok = false;
  bool warm_start_used = false;
};

/// Carries the partial results when a per-eps solve fails.
class StudyAbortError : public LabError {
public:
  StudyAbortError(const std::string& what, double failed_eps, StudyResult partial)
      : LabError(what), failed_eps(failed_eps), partial(std::move(partial)) {}
  double failed_eps;
  StudyResult partial;
};

StudyResult run_study(const StudySpec& spec);
/// Same study on a caller-supplied family (domains must match
/// spec.family.eps_list in count and order).
StudyResult run_study(const StudySpec& spec, const DomainFamily& family);

/// Fixed-control transfer: the same admissible control solved on every
/// member and on the limit; reports the state and Hammerstein gaps plus
/// the control-weighted norm convergence.
struct TransferRecord {
  double eps = 0.0;
  double state_gap = 0.0;
  double z_gap = 0.0;
  double weighted_norm_gap = 0.0;  // | ||y_eps||_U - ||y||_U |
};

struct TransferReport {
  std::vector<TransferRecord> records;
  bool state_trend_ok = false;  // nonincreasing within slack, final <= threshold
  bool z_trend_ok = false;
  double final_state_gap = 0.0;
  double final_z_gap = 0.0;
};

TransferReport state_transfer_check(const ControlField& U_fixed,
                                    const DomainFamily& family, const NodeField& f,
                                    const NodeField& g_data, const KernelSpec& kernel,
                                    const ClassParams& params,
                                    const SolverOptions& state_opts,
                                    const HammersteinOptions& ham_opts,
                                    const StudyOptions& opts);

/// Constructive recovery-sequence probe: for each member, the restriction
/// of y by masking plus one local Jacobi smoothing pass at the clipped
/// fringe, and the Hammerstein re-solve with the masked state. Emits gaps
/// without a verdict; the caller decides what to assert.
struct MoscoM1Record {
  double eps = 0.0;
  double y_gap = 0.0;  // wp-norm over D of (approximation - y)
  double z_gap = 0.0;  // L^p gap of the re-solved Hammerstein solution
  bool masking_exact = false;
};

struct MoscoM1Report {
  std::vector<MoscoM1Record> records;
};

MoscoM1Report mosco_m1_probe(const StateField& y, const DomainFamily& family,
                             const NodeField& g_data, const KernelSpec& kernel,
                             double p, const HammersteinOptions& ham_opts);

/// CSV with one row per eps (limit last); fixed column order.
void write_study_csv(const StudyResult& r, const std::string& path);
std::string study_summary_json(const StudyResult& r);

}  // namespace lab
