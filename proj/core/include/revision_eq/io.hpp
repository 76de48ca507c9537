#pragma once

#include <string>
#include <variant>

#include "revision_eq/equilibrium_check.hpp"
#include "revision_eq/plan.hpp"
#include "revision_eq/simulator.hpp"
#include "revision_eq/stage_game.hpp"

namespace revision_eq {

/// `{"game": "pd"}` or `{"game": "cournot", "p0": 10, "c": 5, "b": 1}`.
/// Throws InputError on malformed text, DomainError on invalid parameters.
StageGame parse_game_spec(const std::string& json_text);
StageGame load_game_file(const std::string& path);

/// MPC plan file:
/// `{"T", "k", "epsilon", "boundaries", "actions", "ultimate_action"}` plus
/// `"tail_policy"` and, under gt_ode, `"tail": {"breakpoints", "actions"}`.
/// Reals are written with 17 significant digits, so reading a written file
/// reproduces every double bit for bit.
std::string plan_to_json(const MpcPlan& plan);

/// General piecewise plan file:
/// `{"T", "breakpoints", "actions", "relaxed_tail"}`.
std::string plan_to_json(const PiecewisePlan& plan);

/// Reads either plan layout (an MPC file is recognized by "boundaries").
std::variant<MpcPlan, PiecewisePlan> parse_plan(const std::string& json_text);
MpcPlan parse_mpc_plan(const std::string& json_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string to_json(const GameValidationReport& report);
/// Includes the grid and margins when `with_grid`.
std::string to_json(const SpeReport& report, bool with_grid);
/// One JSON object per line per opportunity, tagged with the episode index.
std::string trace_jsonl(const EpisodeTrace& trace, std::size_t episode);

}  // namespace revision_eq
