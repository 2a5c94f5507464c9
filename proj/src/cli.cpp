#include "structsynth/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "structsynth/bench.hpp"
#include "structsynth/bounds.hpp"
#include "structsynth/io.hpp"
#include "structsynth/riccati.hpp"
#include "structsynth/solver.hpp"
#include "structsynth/specfun.hpp"

namespace structsynth::cli {

namespace {

struct Options {
  std::string system_path;
  std::string mask_path;
  std::string gains_path;
  std::string reference_path;
  std::string config_path;
  std::string objective = "nuclear";
  std::string target = "h2";
  std::string out_path;
  std::uint64_t seed = 0;
  int trials = 100;
  int horizon = 0;  // 0 = subcommand default
  std::optional<double> tol;
  std::optional<int> max_iters;
  double reg = 0.0;
  bool tied = false;
};

ExactNorm parse_target(const std::string& s) {
  if (s == "h2") return ExactNorm::H2;
  if (s == "hinf") return ExactNorm::Hinf;
  throw InputError("unknown target '" + s + "' (expected h2 or hinf)");
}

/// Surrogates carry the 1/(nN) normalization used by the convex synthesis.
ObjectiveSpec cli_objective(const std::string& selector, const SystemModel& sys, double reg) {
  ObjectiveSpec obj;
  try {
    obj = ObjectiveSpec::parse(selector);
    if (obj.is_surrogate()) obj.scale = 1.0 / static_cast<double>(sys.lifted_dim());
    obj.reg_weight = reg;
    obj.validate(sys.lifted_dim());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return obj;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty())
    out << text;
  else
    write_text_file(o.out_path, text);
}

SystemModel load_system(const Options& o) {
  if (o.system_path.empty()) throw InputError("--system is required");
  return system_from_json(read_json_file(o.system_path));
}

ConstraintSet load_constraints(const Options& o, const SystemModel& sys) {
  if (o.mask_path.empty()) return ConstraintSet::unconstrained(sys, o.tied);
  return constraints_from_json(read_json_file(o.mask_path), sys);
}

SolveOptions solve_options(const Options& o) {
  SolveOptions s;
  if (o.tol) s.gradient_tolerance = *o.tol;
  if (o.max_iters) s.max_iterations = *o.max_iters;
  return s;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const SystemModel sys = load_system(o);
  if (!o.mask_path.empty()) load_constraints(o, sys);
  out << "ok: n=" << sys.state_dim() << " n_u=" << sys.input_dim() << " N=" << sys.horizon()
      << '\n';
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  std::optional<SystemModel> sys;
  std::optional<ConstraintSet> constraints;
  if (o.system_path.empty()) {
    EnsembleParams params;
    params.seed = o.seed;
    if (o.horizon > 0) params.horizon = o.horizon;
    auto generated = generate_coupled_ensemble(params);
    sys.emplace(std::move(generated.first));
    constraints.emplace(o.mask_path.empty() ? std::move(generated.second)
                                            : load_constraints(o, *sys));
  } else {
    sys.emplace(load_system(o));
    constraints.emplace(load_constraints(o, *sys));
  }
  const ObjectiveSpec obj = cli_objective(o.objective, *sys, o.reg);
  const SolveReport report = minimize(*sys, obj, *constraints, solve_options(o));
  Json j = solve_report_to_json(report, *sys);
  if (o.system_path.empty()) {
    j["system"] = system_to_json(*sys);
    j["constraints"] = constraints_to_json(*constraints);
  }
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_opt(const Options& o, std::ostream& out) {
  const SystemModel sys = load_system(o);
  Json j;
  j["target"] = o.target;
  if (parse_target(o.target) == ExactNorm::H2) {
    const LqrResult r = lqr_h2_opt(sys);
    j["value"] = r.h2_value;
    j["gains"] = gains_to_json(r.gains);
    j["used_pseudo_inverse"] = r.used_pseudo_inverse;
  } else {
    const HinfOptResult r = hinf_opt(sys, o.tol.value_or(1e-6));
    j["critical_gamma"] = r.critical_gamma;
    j["value"] = hinf_norm(sys, r.gains);
    j["gains"] = gains_to_json(r.gains);
  }
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_bound(const Options& o, std::ostream& out) {
  const SystemModel sys = load_system(o);
  if (o.gains_path.empty()) throw InputError("--gains is required");
  const GainSchedule gains = gains_from_json(read_json_file(o.gains_path));
  try {
    gains.validate(sys);
  } catch (const ModelError& e) {
    throw InputError(std::string("gains: ") + e.what());
  }
  const Vector sv = spectrum(build_inverse(sys, gains)).singular_values;

  Json j;
  j["h2"] = h2_norm(sys, gains);
  j["hinf"] = hinf_norm(sys, gains);
  j["ub_h2"] = ub_h2(sys, gains);
  j["ub_hinf"] = ub_hinf(sys, gains);
  j["log_ub_h2"] = log_ub_h2(sv, sys.log_abs_det_D());
  j["log_ub_hinf"] = log_ub_hinf(sv, sys.log_abs_det_D());
  j["determinant"] = determinant_invariant(build_inverse(sys, gains));
  if (sv.size() >= 2) {
    j["spread_h2_variance"] = spread_h2_convex(sv).variance;
    j["spread_hinf_variance"] = spread_hinf_convex(sv).variance;
    j["aposteriori_bound_h2"] = aposteriori_bound_h2(sv);
  }
  if (!o.reference_path.empty()) {
    const GainSchedule reference = gains_from_json(read_json_file(o.reference_path));
    reference.validate(sys);
    const Vector sv_ref = spectrum(build_inverse(sys, reference)).singular_values;
    j["subopt_ratio_h2"] = subopt_ratio_h2(sv, sv_ref);
    j["subopt_ratio_hinf"] = subopt_ratio_hinf(sv, sv_ref);
    j["observed_ratio_h2"] = h2_norm(sys, gains) / h2_norm(sys, reference);
    j["observed_ratio_hinf"] = hinf_norm(sys, gains) / hinf_norm(sys, reference);
  }
  const ObjectiveSpec obj = cli_objective(o.objective, sys, o.reg);
  j["objective"] = obj.name();
  j["value"] = evaluate(sys, gains, obj, false).value;
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_curves(const Options& o, std::ostream& out) {
  const int horizon = o.horizon > 0 ? o.horizon : 100;
  const std::vector<CurveRow> rows = scalar_curves(default_k_grid(), horizon);
  std::ostringstream csv;
  write_curves_csv(csv, rows);
  emit(o, csv.str(), out);
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  BenchConfig config;
  if (!o.config_path.empty()) config = bench_config_from_json(read_json_file(o.config_path));
  if (o.seed != 0) config.ensemble.seed = o.seed;
  if (o.horizon > 0) config.ensemble.horizon = o.horizon;
  if (o.tol) config.solve.gradient_tolerance = *o.tol;
  if (o.max_iters) config.solve.max_iterations = *o.max_iters;
  if (o.trials < 1) throw InputError("--trials must be at least 1");
  const ExactNorm target = parse_target(o.target);

  const auto records = run_benchmark(config, o.trials, target);
  std::ostringstream csv;
  write_trials_csv(csv, records);
  if (o.out_path.empty()) {
    out << csv.str();
  } else {
    write_text_file(o.out_path, csv.str());
    int ok = 0, within = 0;
    for (const auto& r : records) {
      if (!r.ok()) continue;
      ++ok;
      if (r.con <= 1.02 * r.ncon) ++within;
    }
    const Histogram h = histogram(records, TrialField::LogConNcon, 10);
    out << "trials: " << records.size() << " ok: " << ok << " con within 2% of ncon: " << within
        << "\nlog(con/ncon) histogram [" << h.lo << ", " << h.hi << "]:";
    for (int c : h.counts) out << ' ' << c;
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured state-feedback synthesis via convex spectral surrogates"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out_path, "Output file (default stdout)");
  };

  auto* validate = app.add_subcommand("validate", "Check a system file (and optional mask)");
  validate->add_option("--system", o.system_path)->required();
  validate->add_option("--mask", o.mask_path);

  auto* synth = app.add_subcommand("synth", "Minimize an objective over structured gains");
  synth->add_option("--system", o.system_path, "System JSON (default: random coupled ensemble)");
  synth->add_option("--mask", o.mask_path);
  synth->add_option("--objective", o.objective, "spectral | nuclear | kyfan:m | h2 | hinf");
  synth->add_option("--seed", o.seed, "Ensemble seed when no system is given");
  synth->add_option("--horizon", o.horizon, "Ensemble horizon when no system is given");
  synth->add_option("--tol", o.tol, "Gradient tolerance");
  synth->add_option("--max-iters", o.max_iters);
  synth->add_option("--reg", o.reg, "Frobenius penalty weight on K");
  synth->add_flag("--tied", o.tied, "Share one gain across time when no mask is given");
  add_common(synth);

  auto* opt = app.add_subcommand("opt", "Unconstrained optimum (LQR or LQ-game bisection)");
  opt->add_option("--system", o.system_path)->required();
  opt->add_option("--target", o.target, "h2 | hinf");
  opt->add_option("--tol", o.tol, "Bisection tolerance (hinf)");
  add_common(opt);

  auto* bound = app.add_subcommand("bound", "Upper bounds and spread quantities for given gains");
  bound->add_option("--system", o.system_path)->required();
  bound->add_option("--gains", o.gains_path)->required();
  bound->add_option("--reference", o.reference_path, "Gains of the true optimum for ratio bounds");
  bound->add_option("--objective", o.objective);
  bound->add_option("--reg", o.reg);
  add_common(bound);

  auto* curves = app.add_subcommand("curves", "Scalar norm vs bound curves");
  curves->add_option("--horizon", o.horizon, "Horizon (default 100)");
  add_common(curves);

  auto* bench = app.add_subcommand("bench", "Randomized CON / NCON / OPT comparison");
  bench->add_option("--config", o.config_path, "JSON configuration");
  bench->add_option("--trials", o.trials);
  bench->add_option("--target", o.target, "h2 | hinf");
  bench->add_option("--seed", o.seed);
  bench->add_option("--horizon", o.horizon);
  bench->add_option("--tol", o.tol);
  bench->add_option("--max-iters", o.max_iters);
  add_common(bench);

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*opt) return cmd_opt(o, out);
    if (*bound) return cmd_bound(o, out);
    if (*curves) return cmd_curves(o, out);
    if (*bench) return cmd_bench(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ModelError& e) {
    err << "error: invalid model: " << e.what() << '\n';
    return kExitInputError;
  } catch (const SolverError& e) {
    err << "error: solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitInputError;
}

}  // namespace structsynth::cli
