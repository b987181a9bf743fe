#include "lab/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "lab/errors.hpp"
#include "lab/parallel.hpp"
#include "lab/state.hpp"

#include "json.hpp"

namespace lab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool nonincreasing_with_slack(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] * (1.0 + slack) + 1e-14) return false;
  }
  return true;
}

NodeField diff_field(const NodeField& a, const NodeField& b) {
  NodeField d(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) d[n] = a[n] - b[n];
  return d;
}

bool mask_superset(const GridDomain& big, const GridDomain& small) {
  for (std::size_t n = 0; n < big.mask.size(); ++n) {
    if (small.mask[n] && !big.mask[n]) return false;
  }
  return true;
}

}  // namespace

StudyResult run_study(const StudySpec& spec) {
  return run_study(spec, family_generate(spec.family, spec.problem.domain.grid));
}

StudyResult run_study(const StudySpec& spec, const DomainFamily& family) {
  const GridSpec& grid = spec.problem.domain.grid;
  const double p = spec.problem.params.p;
  if (family.domains.size() != spec.family.eps_list.size()) {
    throw ConfigError({"run_study: family size does not match eps_list"});
  }

  if (spec.options.support_condition) {
    for (int n = 0; n < grid.nodes(); ++n) {
      if (!family.limit.mask[n] && (std::abs(spec.problem.g[n]) > 1e-14 ||
                                    std::abs(spec.problem.z_d[n]) > 1e-14)) {
        throw ConfigError({"study support condition: g and z_d must vanish "
                           "outside the limit domain"});
      }
    }
  }

  StudyResult result;
  result.warm_start_used = spec.options.warm_start;

  auto solve_on = [&](const GridDomain& dom,
                      const std::vector<double>& init) -> OcpResult {
    OcpProblem prob = spec.problem;
    prob.domain = dom;
    prob.initial = init;
    return optimize(prob);
  };

  // Limit problem first (cold start).
  const auto t0 = std::chrono::steady_clock::now();
  OcpResult limit_opt = solve_on(family.limit, spec.problem.initial);
  result.limit_record.eps = 0.0;
  result.limit_record.value = limit_opt.value;
  result.limit_record.cold_value = limit_opt.value;
  result.limit_record.kkt_residual = limit_opt.kkt_residual;
  result.limit_record.runtime_seconds = seconds_since(t0);
  result.limit_record.optimal_params = limit_opt.params;

  std::vector<double> warm = limit_opt.params;
  const std::size_t n_eps = spec.family.eps_list.size();
  result.superset_family = true;
  for (const auto& dom : family.domains) {
    if (!mask_superset(dom, family.limit)) result.superset_family = false;
  }

  auto record_of = [&](std::size_t k, OcpResult opt, double cold_value,
                       double seconds) {
    StudyRecord rec;
    rec.eps = spec.family.eps_list[k];
    rec.value = opt.value;
    rec.cold_value = cold_value;
    rec.kkt_residual = opt.kkt_residual;
    rec.hc_dist = hc_distance(family.domains[k], family.limit);
    rec.ekeland_dist = ekeland_distance(family.domains[k], family.limit);
    rec.state_gap =
        wp_norm(grid, diff_field(opt.y_opt.values, limit_opt.y_opt.values), p);
    rec.z_gap = lp_norm(grid, diff_field(opt.z_opt.z, limit_opt.z_opt.z), p);
    rec.runtime_seconds = seconds;
    rec.optimal_params = std::move(opt.params);
    return rec;
  };

  if (spec.options.warm_start) {
    // Warm starting chains the solves, so this path is sequential.
    for (std::size_t k = 0; k < n_eps; ++k) {
      const double eps = spec.family.eps_list[k];
      const auto te = std::chrono::steady_clock::now();
      try {
        OcpResult opt = solve_on(family.domains[k], warm);
        // Re-verify the extremes from a cold start to guard warm-start bias.
        double cold_value = opt.value;
        if (k == 0 || k + 1 == n_eps) {
          OcpResult cold = solve_on(family.domains[k], spec.problem.initial);
          cold_value = cold.value;
          if (cold.value < opt.value) opt = std::move(cold);
        }
        warm = opt.params;
        result.records.push_back(
            record_of(k, std::move(opt), cold_value, seconds_since(te)));
      } catch (const LabError& err) {
        throw StudyAbortError("study aborted at eps = " + std::to_string(eps) +
                                  ": " + err.what(),
                              eps, result);
      }
    }
  } else {
    // Independent cold solves; merged in eps order afterwards.
    std::vector<StudyRecord> slots(n_eps);
    std::vector<std::string> errors(n_eps);
    parallel_for(static_cast<int>(n_eps), resolve_threads(spec.options.threads),
                 [&](int k) {
                   const auto te = std::chrono::steady_clock::now();
                   try {
                     OcpResult opt =
                         solve_on(family.domains[k], spec.problem.initial);
                     const double v = opt.value;
                     slots[k] = record_of(k, std::move(opt), v, seconds_since(te));
                   } catch (const LabError& err) {
                     errors[k] = err.what();
                   }
                 });
    for (std::size_t k = 0; k < n_eps; ++k) {
      if (!errors[k].empty()) {
        throw StudyAbortError("study aborted at eps = " +
                                  std::to_string(spec.family.eps_list[k]) + ": " +
                                  errors[k],
                              spec.family.eps_list[k], result);
      }
      result.records.push_back(slots[k]);
    }
  }

  std::vector<double> gaps;
  for (const auto& rec : result.records) {
    gaps.push_back(std::abs(rec.value - result.limit_record.value));
  }
  const double scale = std::max(std::abs(result.limit_record.value), 1e-14);
  result.final_value_gap_rel = gaps.empty() ? 0.0 : gaps.back() / scale;
  result.value_convergence = nonincreasing_with_slack(gaps, spec.options.slack) &&
                             result.final_value_gap_rel <=
                                 spec.options.value_gap_threshold;
  if (result.superset_family) {
    const double final_signed =
        result.records.empty()
            ? 0.0
            : result.records.back().value - result.limit_record.value;
    result.realizing_direction_ok = final_signed <= spec.options.slack * scale;
  }
  return result;
}

TransferReport state_transfer_check(const ControlField& U_fixed,
                                    const DomainFamily& family, const NodeField& f,
                                    const NodeField& g_data, const KernelSpec& kernel,
                                    const ClassParams& params,
                                    const SolverOptions& state_opts,
                                    const HammersteinOptions& ham_opts,
                                    const StudyOptions& opts) {
  const GridSpec& grid = family.limit.grid;
  const double p = params.p;

  EllipticProblem limit_prob{U_fixed, f, family.limit, params, state_opts};
  StateField y_limit = solve_state(limit_prob);
  HammersteinSolution z_limit = solve_hammerstein(y_limit, g_data, kernel, p, ham_opts);
  const double limit_weighted = u_weighted_norm(U_fixed, y_limit.values, p);

  TransferReport rep;
  for (std::size_t k = 0; k < family.domains.size(); ++k) {
    EllipticProblem prob{U_fixed, f, family.domains[k], params, state_opts};
    StateField y_eps = solve_state(prob);
    HammersteinSolution z_eps = solve_hammerstein(y_eps, g_data, kernel, p, ham_opts);

    TransferRecord rec;
    rec.eps = family.spec.eps_list[k];
    rec.state_gap = wp_norm(grid, diff_field(y_eps.values, y_limit.values), p);
    rec.z_gap = lp_norm(grid, diff_field(z_eps.z, z_limit.z), p);
    rec.weighted_norm_gap =
        std::abs(u_weighted_norm(U_fixed, y_eps.values, p) - limit_weighted);
    rep.records.push_back(rec);
  }

  std::vector<double> sgaps, zgaps;
  for (const auto& r : rep.records) {
    sgaps.push_back(r.state_gap);
    zgaps.push_back(r.z_gap);
  }
  rep.final_state_gap = sgaps.empty() ? 0.0 : sgaps.back();
  rep.final_z_gap = zgaps.empty() ? 0.0 : zgaps.back();
  rep.state_trend_ok = nonincreasing_with_slack(sgaps, opts.slack) &&
                       rep.final_state_gap <= opts.state_gap_threshold;
  rep.z_trend_ok = nonincreasing_with_slack(zgaps, opts.slack) &&
                   rep.final_z_gap <= opts.state_gap_threshold;
  return rep;
}

MoscoM1Report mosco_m1_probe(const StateField& y, const DomainFamily& family,
                             const NodeField& g_data, const KernelSpec& kernel,
                             double p, const HammersteinOptions& ham_opts) {
  const GridSpec& grid = y.grid;
  MoscoM1Report rep;

  HammersteinSolution z_limit = solve_hammerstein(y, g_data, kernel, p, ham_opts);

  for (std::size_t k = 0; k < family.domains.size(); ++k) {
    const GridDomain& dom = family.domains[k];
    NodeField w(grid.nodes(), 0.0);
    std::vector<std::uint8_t> clipped(grid.nodes(), 0);
    bool exact = true;
    for (int n = 0; n < grid.nodes(); ++n) {
      if (dom.mask[n]) {
        w[n] = y.values[n];
      } else if (y.values[n] != 0.0) {
        clipped[n] = 1;
        exact = false;
      }
    }
    NodeField approx = w;
    if (!exact) {
      // One Jacobi pass at the fringe next to clipped support; elsewhere the
      // masked values are already the best candidates.
      for (int j = 1; j + 1 < grid.ny; ++j) {
        for (int i = 1; i + 1 < grid.nx; ++i) {
          const int n = grid.node(i, j);
          if (!dom.mask[n]) continue;
          const bool near_clip = clipped[grid.node(i - 1, j)] ||
                                 clipped[grid.node(i + 1, j)] ||
                                 clipped[grid.node(i, j - 1)] ||
                                 clipped[grid.node(i, j + 1)];
          if (near_clip) {
            approx[n] = 0.5 * w[n] + 0.125 * (w[grid.node(i - 1, j)] +
                                              w[grid.node(i + 1, j)] +
                                              w[grid.node(i, j - 1)] +
                                              w[grid.node(i, j + 1)]);
          }
        }
      }
    }

    MoscoM1Record rec;
    rec.eps = family.spec.eps_list[k];
    rec.masking_exact = exact;
    rec.y_gap = wp_norm(grid, diff_field(approx, y.values), p);

    StateField masked_state;
    masked_state.grid = grid;
    masked_state.domain = dom;
    masked_state.values = approx;
    HammersteinSolution z_eps =
        solve_hammerstein(masked_state, g_data, kernel, p, ham_opts);
    rec.z_gap = lp_norm(grid, diff_field(z_eps.z, z_limit.z), p);
    rep.records.push_back(rec);
  }
  return rep;
}

void write_study_csv(const StudyResult& r, const std::string& path) {
  // Runtimes stay out of this file on purpose: the CSV is a reproducible
  // numerical payload, timing is not.
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw LabError("write_study_csv: cannot open " + path);
  std::fprintf(fp,
               "eps,value,cold_value,value_gap,hc_dist,ekeland_dist,state_gap,"
               "z_gap,kkt_residual\n");
  auto row = [&](const StudyRecord& rec) {
    std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 rec.eps, rec.value, rec.cold_value,
                 std::abs(rec.value - r.limit_record.value), rec.hc_dist,
                 rec.ekeland_dist, rec.state_gap, rec.z_gap, rec.kkt_residual);
  };
  for (const auto& rec : r.records) row(rec);
  row(r.limit_record);
  std::fclose(fp);
}

std::string study_summary_json(const StudyResult& r) {
  nlohmann::json j;
  j["value_convergence"] = r.value_convergence;
  j["final_value_gap_rel"] = r.final_value_gap_rel;
  j["superset_family"] = r.superset_family;
  j["realizing_direction_ok"] = r.realizing_direction_ok;
  j["warm_start_used"] = r.warm_start_used;
  j["limit_value"] = r.limit_record.value;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& rec : r.records) {
    recs.push_back({{"eps", rec.eps},
                    {"value", rec.value},
                    {"cold_value", rec.cold_value},
                    {"hc_dist", rec.hc_dist},
                    {"ekeland_dist", rec.ekeland_dist},
                    {"state_gap", rec.state_gap},
                    {"z_gap", rec.z_gap}});
  }
  j["records"] = recs;
  return j.dump(2);
}

}  // namespace lab
