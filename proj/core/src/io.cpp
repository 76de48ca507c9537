#include "revision_eq/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "revision_eq/errors.hpp"
#include "revision_eq/sweep.hpp"

namespace revision_eq {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("malformed {} JSON: {}", what, e.what()));
  }
}

double require_number(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw InputError(fmt::format("{} needs numeric field '{}'", what, key));
  }
  return it->get<double>();
}

std::vector<double> require_reals(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw InputError(fmt::format("{} needs array field '{}'", what, key));
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw InputError(fmt::format("{}: '{}' holds a non-number", what, key));
    out.push_back(v.get<double>());
  }
  return out;
}

std::string real_array(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_real(xs[i]);
  }
  out += "]";
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

StageGame parse_game_spec(const std::string& json_text) {
  json j = parse_json(json_text, "game spec");
  if (!j.is_object() || !j.contains("game") || !j["game"].is_string()) {
    throw InputError("game spec needs a string field 'game'");
  }
  const std::string name = j["game"].get<std::string>();
  if (name == "pd") return make_continuous_pd();
  if (name == "cournot") {
    return make_cournot(require_number(j, "p0", "cournot spec"), require_number(j, "c", "cournot spec"),
                        require_number(j, "b", "cournot spec"));
  }
  throw InputError(fmt::format("unknown game '{}' (expected pd or cournot)", name));
}

StageGame load_game_file(const std::string& path) { return parse_game_spec(read_text_file(path)); }

std::string plan_to_json(const MpcPlan& plan) {
  std::string out = "{\n";
  out += fmt::format("  \"T\": {},\n", format_real(plan.horizon));
  out += fmt::format("  \"k\": {},\n", format_real(plan.k));
  out += fmt::format("  \"epsilon\": {},\n", format_real(plan.epsilon));
  out += fmt::format("  \"tail_policy\": \"{}\",\n",
                     plan.tail_policy == TailPolicy::kGtOde ? "gt_ode" : "epsilon_relax");
  out += fmt::format("  \"boundaries\": {},\n", real_array(plan.boundaries()));
  out += fmt::format("  \"actions\": {},\n", real_array(plan.actions));
  if (plan.tail_policy == TailPolicy::kGtOde) {
    out += fmt::format("  \"tail\": {{\"breakpoints\": {}, \"actions\": {}}},\n",
                       real_array(plan.tail_breakpoints), real_array(plan.tail_actions));
  }
  out += fmt::format("  \"ultimate_action\": {}\n", format_real(plan.ultimate_action));
  out += "}\n";
  return out;
}

std::string plan_to_json(const PiecewisePlan& plan) {
  std::string out = "{\n";
  out += fmt::format("  \"T\": {},\n", format_real(plan.horizon));
  out += fmt::format("  \"breakpoints\": {},\n", real_array(plan.breakpoints));
  out += fmt::format("  \"actions\": {},\n", real_array(plan.actions));
  out += fmt::format("  \"relaxed_tail\": {}\n", format_real(plan.relaxed_tail));
  out += "}\n";
  return out;
}

MpcPlan parse_mpc_plan(const std::string& json_text) {
  auto parsed = parse_plan(json_text);
  if (auto* mpc = std::get_if<MpcPlan>(&parsed)) return std::move(*mpc);
  throw InputError("expected an MPC plan file (with 'boundaries')");
}

std::variant<MpcPlan, PiecewisePlan> parse_plan(const std::string& json_text) {
  json j = parse_json(json_text, "plan");
  if (!j.is_object()) throw InputError("plan file must hold a JSON object");

  if (!j.contains("boundaries")) {
    PiecewisePlan plan;
    plan.horizon = require_number(j, "T", "plan");
    plan.breakpoints = require_reals(j, "breakpoints", "plan");
    plan.actions = require_reals(j, "actions", "plan");
    plan.relaxed_tail = j.contains("relaxed_tail") ? require_number(j, "relaxed_tail", "plan") : 0.0;
    plan.validate();
    return plan;
  }

  MpcPlan plan;
  plan.horizon = require_number(j, "T", "plan");
  plan.k = require_number(j, "k", "plan");
  plan.kappa = 1.0 - plan.k;
  plan.epsilon = require_number(j, "epsilon", "plan");
  plan.actions = require_reals(j, "actions", "plan");
  plan.ultimate_action = require_number(j, "ultimate_action", "plan");
  if (plan.actions.empty()) throw InputError("plan has no slots");
  if (!(plan.horizon > 0.0) || !(plan.k > 0.0 && plan.k < 1.0)) {
    throw InputError("plan needs T > 0 and k in (0,1)");
  }

  std::string policy = j.value("tail_policy", std::string("epsilon_relax"));
  if (policy == "gt_ode") {
    plan.tail_policy = TailPolicy::kGtOde;
    if (!j.contains("tail") || !j["tail"].is_object()) {
      throw InputError("gt_ode plan needs a 'tail' object");
    }
    plan.tail_breakpoints = require_reals(j["tail"], "breakpoints", "plan tail");
    plan.tail_actions = require_reals(j["tail"], "actions", "plan tail");
  } else if (policy != "epsilon_relax") {
    throw InputError(fmt::format("unknown tail_policy '{}'", policy));
  }

  const auto stored = require_reals(j, "boundaries", "plan");
  const auto expected = plan.boundaries();
  if (stored.size() != expected.size()) {
    throw InputError(fmt::format("plan lists {} boundaries but {} slots need {}", stored.size(),
                                 plan.actions.size(), expected.size()));
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (std::abs(stored[i] - expected[i]) > 1e-12 * std::max(1.0, std::abs(expected[i]))) {
      throw InputError(fmt::format("boundary {} = {} does not match -kappa^n T = {}", i, stored[i],
                                   expected[i]));
    }
  }
  plan.to_piecewise().validate();
  return plan;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw InputError(fmt::format("write to '{}' failed", path));
}

std::string to_json(const GameValidationReport& report) {
  json j;
  j["grid_size"] = report.grid_size;
  j["all_passed"] = report.all_passed();
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"worst_violation", c.worst_violation}});
  }
  return j.dump(2) + "\n";
}

std::string to_json(const SpeReport& report, bool with_grid) {
  json j;
  j["verdict"] = to_string(report.verdict);
  j["min_margin"] = finite_or_null(report.min_margin);
  j["min_margin_time"] = report.min_margin_time;
  j["epsilon_used"] = report.epsilon_used;
  j["grid_points"] = report.grid.size();
  if (with_grid) {
    j["grid"] = report.grid;
    j["margins"] = report.margins;
  }
  return j.dump(2) + "\n";
}

std::string trace_jsonl(const EpisodeTrace& trace, std::size_t episode) {
  std::string out;
  for (const auto& rec : trace.opportunities) {
    json j;
    j["episode"] = episode;
    j["time"] = rec.time;
    j["prescribed"] = rec.prescribed;
    j["realized"] = rec.realized;
    j["erred"] = rec.erred;
    j["retaliating"] = rec.retaliating;
    j["triggered"] = rec.triggered;
    j["ignored_deviation"] = rec.ignored_deviation;
    j["retaliation_until"] = {finite_or_null(rec.retaliation_until[0]),
                              finite_or_null(rec.retaliation_until[1])};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace revision_eq
