#ifndef ROBOTIQ_PLAN_GRAMMAR_HPP_
#define ROBOTIQ_PLAN_GRAMMAR_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "robotiq/geom/world.hpp"
#include "robotiq/plan/plan.hpp"

namespace robotiq::plan {

inline constexpr double kDefaultStandOff = 0.3;  // approach and leave distance when unstated

// Case-insensitive command grammar:
//   command := clause { ("," | "and" | "then" | "and then" | ";" | ".") clause }
//   clause  := go to X | navigate to X | pick [up] X | place X [near Y]
//            | put X [down] [near Y] | approach [marker] N [to D] | leave [...] [D]
//            | bring X to Y | locate X | find X | where is X
// Noun phrases are matched against the map registries by normalized
// substring; unmatched phrases pass through for the validator to reject.
// Throws Error(kUnparseable) listing the verbs when a clause has none, and
// Error(kInvalidInput) for blank text.
std::vector<SkillCall> parse_command(std::string_view text, const geom::WorldMap& world);

// Named location nearest to the item's current pose.
std::string location_of(const geom::WorldMap& world, const std::string& item);

// Verbs the grammar recognizes, for error messages and prompts.
const std::vector<std::string>& supported_verbs();

}  // namespace robotiq::plan

#endif  // ROBOTIQ_PLAN_GRAMMAR_HPP_
