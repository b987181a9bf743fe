#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "lab/config.hpp"
#include "lab/errors.hpp"
#include "lab/io.hpp"

#include "json.hpp"

namespace lab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
  fs::path out;
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  std::string path(const std::string& name) {
    files.push_back(name);
    return (out / name).string();
  }
};

void write_manifest(RunContext& ctx, const ProblemConfig& cfg,
                    const std::string& command) {
  json m;
  m["config_hash"] = hex64(cfg.hash());
  m["artifact_version"] = kVersion;
  m["command"] = command;
  m["seed"] = cfg.seed;
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["created_at"] = stamp;
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                    ctx.started)
                          .count();
  json outputs = json::array();
  for (const auto& f : ctx.files) {
    std::error_code ec;
    const auto bytes = fs::file_size(ctx.out / f, ec);
    outputs.push_back({{"path", f}, {"bytes", ec ? 0 : bytes}});
  }
  m["outputs"] = outputs;
  write_text_file((ctx.out / "manifest.json").string(), m.dump(2) + "\n");
}

GridDomain require_domain(const ProblemConfig& cfg) {
  if (!cfg.domain) {
    throw ConfigError({"this command needs a \"domain\" entry"});
  }
  return rasterize(*cfg.domain, cfg.grid);
}

ControlField initial_control(const ProblemConfig& cfg, const GridDomain& dom) {
  OcpProblem prob;
  prob.domain = dom;
  prob.params = cfg.params;
  prob.n1 = cfg.n1;
  prob.n2 = cfg.n2;
  const ParamBox box = param_box(prob);
  std::vector<double> x(cfg.n1 + cfg.n2);
  for (int k = 0; k < cfg.n1 + cfg.n2; ++k) {
    x[k] = cfg.control_init.empty() ? 0.5 * (box.lo[k] + box.hi[k])
                                    : cfg.control_init[k];
  }
  std::vector<double> profile1(dom.grid.ny - 1), profile2(dom.grid.nx - 1);
  for (int j = 0; j < dom.grid.ny - 1; ++j) {
    profile1[j] = x[static_cast<long long>(j) * cfg.n1 / (dom.grid.ny - 1)];
  }
  for (int i = 0; i < dom.grid.nx - 1; ++i) {
    profile2[i] = x[cfg.n1 + static_cast<long long>(i) * cfg.n2 / (dom.grid.nx - 1)];
  }
  return make_diagonal_control(profile1, profile2, dom.grid, cfg.params);
}

OcpProblem build_ocp(const ProblemConfig& cfg, const GridDomain& dom) {
  OcpProblem prob;
  prob.domain = dom;
  prob.params = cfg.params;
  prob.f = evaluate(cfg.f, cfg.grid);
  prob.g = evaluate(cfg.g, cfg.grid);
  prob.z_d = evaluate(cfg.z_d, cfg.grid);
  prob.kernel = cfg.kernel;
  prob.n1 = cfg.n1;
  prob.n2 = cfg.n2;
  prob.initial = cfg.control_init;
  prob.state_options = cfg.solver;
  prob.ham_options = cfg.hammerstein;
  prob.ham_options.seed = cfg.seed;
  prob.optimizer = cfg.optimizer;
  return prob;
}

json stats_json(const SolverStats& st) {
  return json{{"iterations", st.iterations},
              {"residual_norm", st.residual_norm},
              {"method", st.method}};
}

int cmd_solve_state(RunContext& ctx, const ProblemConfig& cfg) {
  const GridDomain dom = require_domain(cfg);
  const ControlField U = initial_control(cfg, dom);
  EllipticProblem prob{U, evaluate(cfg.f, cfg.grid), dom, cfg.params, cfg.solver};
  StateField y = solve_state(prob);
  write_state_csv(y, ctx.path("state.csv"));
  write_field_binary(y.values, ctx.path("state.f64"));
  write_pgm(dom, ctx.path("mask.pgm"));
  AprioriReport ap = apriori_check(y, prob.f, cfg.params);
  json j = stats_json(y.stats);
  j["apriori"] = {{"lhs", ap.lhs}, {"rhs", ap.rhs}, {"pass", ap.pass}};
  j["wp_norm"] = wp_norm(dom.grid, y.values, cfg.params.p);
  write_text_file(ctx.path("solver_stats.json"), j.dump(2) + "\n");
  return ap.pass ? 0 : 1;
}

int cmd_solve_hammerstein(RunContext& ctx, const ProblemConfig& cfg) {
  const GridDomain dom = require_domain(cfg);
  const ControlField U = initial_control(cfg, dom);
  EllipticProblem prob{U, evaluate(cfg.f, cfg.grid), dom, cfg.params, cfg.solver};
  StateField y = solve_state(prob);
  HammersteinOptions opts = cfg.hammerstein;
  opts.seed = cfg.seed;
  HammersteinSolution z =
      solve_hammerstein(y, evaluate(cfg.g, cfg.grid), cfg.kernel, cfg.params.p, opts);
  StateField zf{dom.grid, dom, z.z, {}};
  write_state_csv(zf, ctx.path("z.csv"));
  write_field_binary(z.z, ctx.path("z.f64"));
  json j;
  j["residual_norm"] = z.residual_norm;
  j["newton_iters"] = z.newton_iters;
  j["uniqueness_gap"] = z.uniqueness_gap;
  j["lambda_bound"] = z.lambda_bound;
  j["z_lp_norm"] = z.z_lp_norm;
  j["energy_identity_defect"] = z.energy_identity_defect;
  j["state"] = stats_json(y.stats);
  write_text_file(ctx.path("hammerstein_stats.json"), j.dump(2) + "\n");
  const bool ok = z.z_lp_norm <= z.lambda_bound + 1e-12;
  return ok ? 0 : 1;
}

int cmd_optimize(RunContext& ctx, const ProblemConfig& cfg) {
  const GridDomain dom = require_domain(cfg);
  OcpProblem prob = build_ocp(cfg, dom);
  OcpResult res = optimize(prob);
  write_text_file(ctx.path("ocp_result.json"), ocp_result_to_json(res) + "\n");
  write_text_file(ctx.path("control.json"),
                  control_to_json(res.U_opt, cfg.params) + "\n");
  write_control_binary(res.U_opt, ctx.path("control.f64"));
  write_field_binary(res.y_opt.values, ctx.path("y.f64"));
  write_field_binary(res.z_opt.z, ctx.path("z.f64"));
  std::FILE* fp = std::fopen(ctx.path("iterates.csv").c_str(), "w");
  if (!fp) throw LabError("optimize: cannot write iterates.csv");
  std::fprintf(fp, "iteration,value\n");
  for (std::size_t k = 0; k < res.iterate_values.size(); ++k) {
    std::fprintf(fp, "%zu,%.17g\n", k, res.iterate_values[k]);
  }
  std::fclose(fp);
  return 0;
}

int cmd_perturb_study(RunContext& ctx, const ProblemConfig& cfg) {
  if (!cfg.family) {
    throw ConfigError({"perturb-study needs a \"family\" entry"});
  }
  StudySpec spec;
  spec.family = *cfg.family;
  spec.options = cfg.study;

  // Template problem on the limit domain (run_study swaps domains itself).
  DomainFamily fam = family_generate(spec.family, cfg.grid);
  spec.problem = build_ocp(cfg, fam.limit);
  if (spec.options.support_condition) {
    // The support hypothesis is enforced by construction: data outside the
    // limit set is cut to zero before the study begins.
    for (int n = 0; n < cfg.grid.nodes(); ++n) {
      if (!fam.limit.mask[n]) {
        spec.problem.g[n] = 0.0;
        spec.problem.z_d[n] = 0.0;
      }
    }
  }

  StudyResult result = run_study(spec);
  write_study_csv(result, ctx.path("study.csv"));
  write_text_file(ctx.path("study_summary.json"), study_summary_json(result) + "\n");

  PlotSeries value_gap{"value gap", {}}, state_gap{"state gap", {}},
      hc{"hc distance", {}};
  json timing;
  timing["limit_seconds"] = result.limit_record.runtime_seconds;
  json per_eps = json::array();
  for (const auto& rec : result.records) {
    value_gap.points.push_back(
        {rec.eps, std::abs(rec.value - result.limit_record.value)});
    state_gap.points.push_back({rec.eps, rec.state_gap});
    hc.points.push_back({rec.eps, rec.hc_dist});
    per_eps.push_back({{"eps", rec.eps}, {"seconds", rec.runtime_seconds}});
  }
  timing["per_eps"] = per_eps;
  write_text_file(ctx.path("timing.json"), timing.dump(2) + "\n");
  write_svg_lineplot(ctx.path("value_gap.svg"), "Optimal value gap vs eps", "eps",
                     "|I_eps - I_0|", {value_gap}, true);
  write_svg_lineplot(ctx.path("state_gap.svg"), "State gap vs eps", "eps",
                     "wp-norm gap", {state_gap}, true);
  write_svg_lineplot(ctx.path("hc_distance.svg"), "Domain distance vs eps", "eps",
                     "d_Hc", {hc}, true);
  write_pgm(fam.limit, ctx.path("mask_limit.pgm"));
  for (std::size_t k = 0; k < fam.domains.size(); ++k) {
    write_pgm(fam.domains[k], ctx.path("mask_eps" + std::to_string(k) + ".pgm"));
  }

  // Control checkpoints: the per-eps and limit optimizers' reduced
  // parameters, re-expanded to full fields.
  auto expand = [&](const std::vector<double>& params) {
    std::vector<double> profile1(cfg.grid.ny - 1), profile2(cfg.grid.nx - 1);
    for (int j = 0; j < cfg.grid.ny - 1; ++j) {
      profile1[j] = params[static_cast<long long>(j) * cfg.n1 / (cfg.grid.ny - 1)];
    }
    for (int i = 0; i < cfg.grid.nx - 1; ++i) {
      profile2[i] =
          params[cfg.n1 + static_cast<long long>(i) * cfg.n2 / (cfg.grid.nx - 1)];
    }
    return make_diagonal_control(profile1, profile2, cfg.grid, cfg.params);
  };
  if (!result.limit_record.optimal_params.empty()) {
    const ControlField U0 = expand(result.limit_record.optimal_params);
    write_text_file(ctx.path("control_limit.json"),
                    control_to_json(U0, cfg.params) + "\n");
    write_control_binary(U0, ctx.path("control_limit.f64"));
  }
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    if (result.records[k].optimal_params.empty()) continue;
    const ControlField Uk = expand(result.records[k].optimal_params);
    write_control_binary(Uk, ctx.path("control_eps" + std::to_string(k) + ".f64"));
  }
  return result.value_convergence ? 0 : 1;
}

int cmd_domain_distance(RunContext& ctx, const ProblemConfig& cfg) {
  if (!cfg.domain || !cfg.domain_b) {
    throw ConfigError({"domain-distance needs \"domain\" and \"domain_b\" entries"});
  }
  const GridDomain a = rasterize(*cfg.domain, cfg.grid);
  const GridDomain b = rasterize(*cfg.domain_b, cfg.grid);
  json j;
  j["hc_distance"] = hc_distance(a, b);
  j["ekeland_distance"] = ekeland_distance(a, b);
  j["measure_a"] = a.measure;
  j["measure_b"] = b.measure;
  write_text_file(ctx.path("distances.json"), j.dump(2) + "\n");
  write_pgm(a, ctx.path("mask_a.pgm"));
  write_pgm(b, ctx.path("mask_b.pgm"));
  return 0;
}

int cmd_verify_class(RunContext& ctx, const ProblemConfig& cfg) {
  const GridDomain dom = cfg.domain
                             ? rasterize(*cfg.domain, cfg.grid)
                             : rasterize(ShapeSpec::Disk(0.5, 0.5, 0.35), cfg.grid);
  const ControlField U = initial_control(cfg, dom);
  const ClassReport rep = check_class(U, cfg.params, 1000, cfg.seed);
  json j;
  j["growth_ok"] = rep.growth_ok;
  j["monotone_ok"] = rep.monotone_ok;
  j["coercive_ok"] = rep.coercive_ok;
  j["growth_margin"] = rep.growth_margin;
  j["monotone_margin"] = rep.monotone_margin;
  j["coercive_margin"] = rep.coercive_margin;
  j["samples"] = rep.samples;
  j["seed"] = rep.seed;
  j["worst_growth_cell"] = rep.worst_growth_cell;
  write_text_file(ctx.path("class_report.json"), j.dump(2) + "\n");
  return rep.all_ok() ? 0 : 1;
}

const char* module_of(const LabError& err) {
  if (dynamic_cast<const StudyAbortError*>(&err)) return "stability_lab";
  if (dynamic_cast<const GridMismatchError*>(&err)) return "domain_geometry";
  if (dynamic_cast<const GeometryError*>(&err)) return "domain_geometry";
  if (dynamic_cast<const InfeasibleControlError*>(&err)) return "control_fields";
  if (dynamic_cast<const UnsupportedFormError*>(&err)) return "state_solver";
  if (dynamic_cast<const SolverError*>(&err)) return "solver";
  if (dynamic_cast<const ConfigError*>(&err)) return "cli_config";
  return "lab";
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds = {
      "solve-state", "solve-hammerstein", "optimize",
      "perturb-study", "domain-distance", "verify-class"};
  return cmds;
}

int dispatch(const std::string& command, const ProblemConfig& cfg,
             const std::string& out_dir) {
  RunContext ctx;
  ctx.out = out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create output directory %s\n", out_dir.c_str());
    return 2;
  }

  int code = 0;
  try {
    if (command == "solve-state") {
      code = cmd_solve_state(ctx, cfg);
    } else if (command == "solve-hammerstein") {
      code = cmd_solve_hammerstein(ctx, cfg);
    } else if (command == "optimize") {
      code = cmd_optimize(ctx, cfg);
    } else if (command == "perturb-study") {
      code = cmd_perturb_study(ctx, cfg);
    } else if (command == "domain-distance") {
      code = cmd_domain_distance(ctx, cfg);
    } else if (command == "verify-class") {
      code = cmd_verify_class(ctx, cfg);
    } else {
      return 2;
    }
  } catch (const LabError& err) {
    json e;
    e["module"] = module_of(err);
    e["error"] = err.what();
    if (const auto* cfg_err = dynamic_cast<const ConfigError*>(&err)) {
      e["violations"] = cfg_err->violations;
    }
    if (const auto* study_err = dynamic_cast<const StudyAbortError*>(&err)) {
      e["failed_eps"] = study_err->failed_eps;
      e["partial_records"] = study_err->partial.records.size();
    }
    write_text_file((ctx.out / "error.json").string(), e.dump(2) + "\n");
    write_manifest(ctx, cfg, command);
    std::fprintf(stderr, "%s\n", err.what());
    return 1;
  }
  write_manifest(ctx, cfg, command);
  return code;
}

}  // namespace lab
