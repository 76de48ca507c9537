#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "manifest.hpp"
#include "revision_eq/equilibrium_check.hpp"
#include "revision_eq/errors.hpp"
#include "revision_eq/io.hpp"

namespace revision_eq::cli {

namespace {

using nlohmann::json;

std::string real(double v) { return format_real(v); }

std::string real_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += real(xs[i]);
  }
  return out;
}

const char* tail_name(TailPolicy p) { return p == TailPolicy::kGtOde ? "gt_ode" : "epsilon_relax"; }

TailPolicy parse_tail_policy(const std::string& text) {
  if (text == "epsilon_relax") return TailPolicy::kEpsilonRelax;
  if (text == "gt_ode") return TailPolicy::kGtOde;
  throw InputError(fmt::format("unknown tail policy '{}' (epsilon_relax or gt_ode)", text));
}

GtPlanSource parse_gt_plan(const std::string& text) {
  if (text == "shared") return GtPlanSource::kSharedMpc;
  if (text == "ode") return GtPlanSource::kOde;
  throw InputError(fmt::format("unknown GT plan source '{}' (shared or ode)", text));
}

const char* gt_plan_name(GtPlanSource s) { return s == GtPlanSource::kOde ? "ode" : "shared"; }

/// Plan file contents as a piecewise plan plus the k it carries, if any.
struct LoadedPlan {
  PiecewisePlan plan;
  std::optional<double> k;
};

LoadedPlan load_plan(const std::string& path) {
  auto parsed = parse_plan(read_text_file(path));
  if (auto* mpc = std::get_if<MpcPlan>(&parsed)) return {mpc->to_piecewise(), mpc->k};
  return {std::get<PiecewisePlan>(parsed), std::nullopt};
}

double plan_k(const LoadedPlan& loaded, double flag_k) {
  if (loaded.k) return *loaded.k;
  if (!(flag_k > 0.0 && flag_k < 1.0)) {
    throw InputError("a piecewise plan file needs --k in (0,1)");
  }
  return flag_k;
}

std::string command_line(int argc, const char* const* argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

// Set by run() so manifests record the invoking command line.
std::string g_command_line;

RunManifest manifest_for(const std::string& subcommand) {
  RunManifest m;
  m.command = g_command_line.empty() ? "revision_eq " + subcommand : g_command_line;
  m.parameters["subcommand"] = subcommand;
  return m;
}

std::string game_arg;  // raw --game value, digested when it names a file

}  // namespace

StageGame resolve_game(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) return load_game_file(arg);
  if (arg == "pd") return make_continuous_pd();
  if (arg == "cournot") return make_cournot(10.0, 5.0, 1.0);
  throw InputError(fmt::format("--game '{}' is neither a builtin (pd, cournot) nor a readable file", arg));
}

std::vector<double> parse_real_list(const std::string& text) {
  auto to_real = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw InputError(fmt::format("'{}' is not a number", s));
    }
    if (used != s.size() || !std::isfinite(v)) throw InputError(fmt::format("'{}' is not a number", s));
    return v;
  };

  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    auto first = text.find(':');
    auto second = text.find(':', first + 1);
    if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
      throw InputError(fmt::format("range '{}' must be start:stop:step", text));
    }
    double start = to_real(text.substr(0, first));
    double stop = to_real(text.substr(first + 1, second - first - 1));
    double step = to_real(text.substr(second + 1));
    if (!(step > 0.0)) throw InputError(fmt::format("range '{}' needs a positive step", text));
    if (stop >= start) {
      auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
      out.reserve(count);
      for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size() && !text.empty()) {
      auto comma = text.find(',', pos);
      auto token = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      out.push_back(to_real(token));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw InputError(fmt::format("'{}' is an empty range", text));
  return out;
}

int cmd_validate(const StageGame& game, int grid_size, std::ostream& out) {
  auto report = validate_game(game, grid_size);
  out << to_json(report);
  return report.all_passed() ? kExitOk : kExitAnalyticFailure;
}

int cmd_synthesize(const StageGame& game, const SynthesizeArgs& args, std::ostream& out,
                   std::ostream& err) {
  SynthesisOptions options;
  options.epsilon = args.epsilon;
  options.tail_policy = args.tail_policy;
  auto result = synthesize_plan(game, args.lambda, args.T, args.k, options);
  const auto& plan = result.plan;
  auto report = verify_spe(game, plan.to_piecewise(), plan.k, args.lambda, args.grid_points,
                           args.epsilon);
  double value = expected_payoff(game, plan, args.lambda, args.T);

  std::ostream& summary = args.out_path.empty() ? err : out;
  if (args.out_path.empty()) {
    out << plan_to_json(plan);
  } else {
    write_text_file(args.out_path, plan_to_json(plan));
    auto m = manifest_for("synthesize");
    m.parameters["game"] = game_arg.empty() ? game.name() : game_arg;
    m.parameters["lambda"] = real(args.lambda);
    m.parameters["T"] = real(args.T);
    m.parameters["k"] = real(args.k);
    m.parameters["epsilon"] = real(args.epsilon);
    m.parameters["tail_policy"] = tail_name(args.tail_policy);
    m.parameters["grid"] = std::to_string(args.grid_points);
    write_manifest(m, {game_arg}, args.out_path);
  }

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  summary << "slots: " << plan.slot_count() << '\n';
  summary << "terminal_action: " << real(plan.ultimate_action) << '\n';
  summary << "min_margin: " << real(report.min_margin) << '\n';
  summary << "verdict: " << to_string(report.verdict) << '\n';
  summary << "expected_payoff: " << real(value) << '\n';
  return report.accepted() ? kExitOk : kExitAnalyticFailure;
}

int cmd_verify(const StageGame& game, const VerifyArgs& args, std::ostream& out) {
  auto loaded = load_plan(args.plan_path);
  auto report = verify_spe(game, loaded.plan, plan_k(loaded, args.k), args.lambda, args.grid_points,
                           args.epsilon);
  out << to_json(report, args.with_grid);
  return report.accepted() ? kExitOk : kExitAnalyticFailure;
}

int cmd_payoff(const StageGame& game, const PayoffArgs& args, std::ostream& out) {
  auto loaded = load_plan(args.plan_path);
  double horizon = args.horizon < 0.0 ? loaded.plan.horizon : args.horizon;
  double value = expected_payoff(game, loaded.plan, args.lambda, horizon);
  out << fmt::format("{{\"horizon\": {}, \"lambda\": {}, \"expected_payoff\": {}}}\n", real(horizon),
                     real(args.lambda), real(value));
  return kExitOk;
}

int cmd_simulate(const StageGame& game, const SimulateArgs& args, std::ostream& out) {
  LoadedPlan loaded;
  if (args.plan_path.empty()) {
    SynthesisOptions options;
    options.epsilon = args.epsilon;
    auto result = synthesize_plan(game, args.lambda, args.T, args.k, options);
    loaded = {result.plan.to_piecewise(), result.plan.k};
  } else {
    loaded = load_plan(args.plan_path);
  }
  double k = plan_k(loaded, args.k);

  SimConfig config;
  config.lambda = args.lambda;
  config.T = loaded.plan.horizon;
  config.error_rate = args.error_rate;
  config.error_model = args.error_model;
  config.replications = args.replications;
  config.master_seed = args.seed;
  config.agents[0] = AgentSpec{args.strategy, loaded.plan, k};
  config.agents[1] = AgentSpec{args.opponent, loaded.plan, k};
  config.record_traces = !args.trace_path.empty();
  config.workers = args.threads;
  auto result = run_batch(game, config);

  if (config.record_traces) {
    std::string lines;
    for (std::size_t r = 0; r < result.traces.size(); ++r) lines += trace_jsonl(result.traces[r], r);
    write_text_file(args.trace_path, lines);
  }

  std::string text = fmt::format(
      "{{\n  \"strategies\": [\"{}\", \"{}\"],\n  \"lambda\": {},\n  \"T\": {},\n  \"k\": {},\n"
      "  \"error_rate\": {},\n  \"error_model\": \"{}\",\n  \"seed\": {},\n  \"n\": {},\n"
      "  \"mean_payoff\": [{}, {}],\n  \"std_error\": [{}, {}],\n  \"mean_welfare\": {},\n"
      "  \"welfare_std_error\": {},\n  \"std_error_defined\": {}\n}}\n",
      to_string(args.strategy), to_string(args.opponent), real(args.lambda), real(config.T), real(k),
      real(args.error_rate), to_string(args.error_model), args.seed, result.n,
      real(result.mean_payoff[0]), real(result.mean_payoff[1]), real(result.std_error[0]),
      real(result.std_error[1]), real(result.mean_welfare), real(result.welfare_std_error),
      result.std_error_defined ? "true" : "false");

  auto params = [&] {
    auto m = manifest_for("simulate");
    m.seed = args.seed;
    m.parameters["game"] = game_arg.empty() ? game.name() : game_arg;
    m.parameters["lambda"] = real(args.lambda);
    m.parameters["T"] = real(config.T);
    m.parameters["k"] = real(k);
    m.parameters["epsilon"] = real(args.epsilon);
    m.parameters["plan"] = args.plan_path;
    m.parameters["strategy"] = to_string(args.strategy);
    m.parameters["opponent"] = to_string(args.opponent);
    m.parameters["error_rate"] = real(args.error_rate);
    m.parameters["error_model"] = to_string(args.error_model);
    m.parameters["replications"] = std::to_string(args.replications);
    return m;
  };
  if (!args.trace_path.empty()) write_manifest(params(), {game_arg, args.plan_path}, args.trace_path);
  if (args.out_path.empty()) {
    out << text;
  } else {
    write_text_file(args.out_path, text);
    write_manifest(params(), {game_arg, args.plan_path}, args.out_path);
  }
  return kExitOk;
}

SweepConfig make_sweep_config(const SweepArgs& args) {
  if (args.T_values.empty()) throw InputError("empty T range");
  if (args.k_values.empty()) throw InputError("empty k list");
  if (args.error_rates.empty()) throw InputError("empty error-rate list");
  SweepConfig config;
  config.T_values = args.T_values;
  config.k_values = args.k_values;
  config.error_rates = args.error_rates;
  config.error_model = args.error_model;
  config.lambda = args.lambda;
  config.replications = args.replications;
  config.master_seed = args.seed;
  config.synthesis.epsilon = args.epsilon;
  config.workers = args.threads;
  for (auto& s : config.strategies) {
    if (s.kind == StrategyKind::kGrimTrigger) s.gt_plan = args.gt_plan;
  }
  return config;
}

namespace {

void emit_table(const StageGame& game, const SweepArgs& args, const std::string& subcommand,
                const std::string& csv, std::ostream& out) {
  if (args.out_path.empty()) {
    out << csv;
    return;
  }
  write_text_file(args.out_path, csv);
  auto m = manifest_for(subcommand);
  m.seed = args.seed;
  m.parameters["game"] = game_arg.empty() ? game.name() : game_arg;
  m.parameters["T"] = real_list(args.T_values);
  m.parameters["k"] = real_list(args.k_values);
  m.parameters["errors"] = real_list(args.error_rates);
  m.parameters["error_model"] = to_string(args.error_model);
  m.parameters["gt_plan"] = gt_plan_name(args.gt_plan);
  m.parameters["lambda"] = real(args.lambda);
  m.parameters["epsilon"] = real(args.epsilon);
  m.parameters["replications"] = std::to_string(args.replications);
  write_manifest(m, {game_arg}, args.out_path);
}

}  // namespace

int cmd_sweep(const StageGame& game, const SweepArgs& args, std::ostream& out) {
  auto rows = sweep(game, make_sweep_config(args));
  emit_table(game, args, "sweep", sweep_csv(rows), out);
  return kExitOk;
}

int cmd_compare(const StageGame& game, const SweepArgs& args, std::ostream& out) {
  auto config = make_sweep_config(args);
  auto rows = sweep(game, config);
  auto diff = compare_strategies(rows, config.strategies.at(0).label, config.strategies.at(1).label);
  emit_table(game, args, "compare", compare_csv(diff), out);
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limited Retaliation plans for revision games: synthesis, verification, simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  std::string game = "pd";
  auto add_game = [&](CLI::App* sub) {
    sub->add_option("--game", game, "pd, cournot, or a game spec JSON file")->capture_default_str();
  };

  int validate_grid = 101;
  auto* validate = app.add_subcommand("validate", "check the stage-game assumptions");
  add_game(validate);
  validate->add_option("--grid", validate_grid, "grid points")->check(CLI::Range(3, 1000000));

  SynthesizeArgs syn;
  std::string syn_tail = "epsilon_relax";
  auto* synthesize = app.add_subcommand("synthesize", "build the MPC plan");
  add_game(synthesize);
  synthesize->add_option("--lambda", syn.lambda)->capture_default_str();
  synthesize->add_option("--T", syn.T)->capture_default_str();
  synthesize->add_option("--k", syn.k)->capture_default_str();
  synthesize->add_option("--epsilon", syn.epsilon)->capture_default_str();
  synthesize->add_option("--tail", syn_tail, "epsilon_relax or gt_ode")->capture_default_str();
  synthesize->add_option("--grid", syn.grid_points, "verification grid")->capture_default_str();
  synthesize->add_option("--out", syn.out_path, "plan JSON path (default stdout)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "certify the incentive constraint of a plan");
  add_game(verify);
  verify->add_option("--plan", ver.plan_path)->required();
  verify->add_option("--lambda", ver.lambda)->capture_default_str();
  verify->add_option("--k", ver.k, "for piecewise plan files");
  verify->add_option("--grid", ver.grid_points)->capture_default_str();
  verify->add_option("--epsilon", ver.epsilon)->capture_default_str();
  verify->add_flag("--with-grid", ver.with_grid, "include grid and margins");

  PayoffArgs pay;
  auto* payoff = app.add_subcommand("payoff", "expected payoff of a plan");
  add_game(payoff);
  payoff->add_option("--plan", pay.plan_path)->required();
  payoff->add_option("--lambda", pay.lambda)->capture_default_str();
  payoff->add_option("--horizon", pay.horizon, "default: the plan's T");

  SimulateArgs sim;
  std::string sim_strategy = "LR", sim_opponent = "LR", sim_model = "uniform_random";
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo revision games");
  add_game(simulate);
  simulate->add_option("--lambda", sim.lambda)->capture_default_str();
  simulate->add_option("--T", sim.T)->capture_default_str();
  simulate->add_option("--k", sim.k)->capture_default_str();
  simulate->add_option("--epsilon", sim.epsilon)->capture_default_str();
  simulate->add_option("--plan", sim.plan_path, "plan file (default: synthesize)");
  simulate->add_option("--strategy", sim_strategy, "LR, GT or constant")->capture_default_str();
  simulate->add_option("--opponent", sim_opponent)->capture_default_str();
  simulate->add_option("--error-rate", sim.error_rate)->capture_default_str();
  simulate->add_option("--error-model", sim_model, "uniform_random or defect")->capture_default_str();
  simulate->add_option("--replications", sim.replications)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--threads", sim.threads, "0 = REVISION_EQ_THREADS or auto");
  simulate->add_option("--trace", sim.trace_path, "per-opportunity JSON lines");
  simulate->add_option("--out", sim.out_path, "result JSON path (default stdout)");

  SweepArgs swp;
  std::string swp_T, swp_k = "0.33", swp_errors = "0.02,0.1,0.3", swp_model = "uniform_random";
  std::string swp_gt = "shared";
  auto add_sweep = [&](CLI::App* sub) {
    add_game(sub);
    sub->add_option("--T", swp_T, "start:stop:step or a comma list")->required();
    sub->add_option("--k", swp_k, "comma list")->capture_default_str();
    sub->add_option("--errors", swp_errors, "comma list")->capture_default_str();
    sub->add_option("--error-model", swp_model)->capture_default_str();
    sub->add_option("--gt-plan", swp_gt, "shared or ode")->capture_default_str();
    sub->add_option("--lambda", swp.lambda)->capture_default_str();
    sub->add_option("--epsilon", swp.epsilon)->capture_default_str();
    sub->add_option("--replications", swp.replications)->capture_default_str();
    sub->add_option("--seed", swp.seed)->capture_default_str();
    sub->add_option("--threads", swp.threads, "0 = REVISION_EQ_THREADS or auto");
    sub->add_option("--out", swp.out_path, "CSV path (default stdout)");
  };
  auto* sweep_cmd = app.add_subcommand("sweep", "LR and GT over a T x k x error grid");
  add_sweep(sweep_cmd);
  auto* compare_cmd = app.add_subcommand("compare", "LR minus GT per sweep cell");
  add_sweep(compare_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  g_command_line = command_line(argc, argv);
  game_arg = std::filesystem::is_regular_file(game) ? game : std::string();
  try {
    StageGame g = resolve_game(game);
    if (validate->parsed()) return cmd_validate(g, validate_grid, out);
    if (synthesize->parsed()) {
      syn.tail_policy = parse_tail_policy(syn_tail);
      return cmd_synthesize(g, syn, out, err);
    }
    if (verify->parsed()) return cmd_verify(g, ver, out);
    if (payoff->parsed()) return cmd_payoff(g, pay, out);
    if (simulate->parsed()) {
      sim.strategy = parse_strategy_kind(sim_strategy);
      sim.opponent = parse_strategy_kind(sim_opponent);
      sim.error_model = parse_error_model(sim_model);
      return cmd_simulate(g, sim, out);
    }
    swp.T_values = parse_real_list(swp_T);
    swp.k_values = parse_real_list(swp_k);
    swp.error_rates = parse_real_list(swp_errors);
    swp.error_model = parse_error_model(swp_model);
    swp.gt_plan = parse_gt_plan(swp_gt);
    if (sweep_cmd->parsed()) return cmd_sweep(g, swp, out);
    return cmd_compare(g, swp, out);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitAnalyticFailure;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAnalyticFailure;
  }
}

}  // namespace revision_eq::cli
