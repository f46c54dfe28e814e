#ifndef ROBOTIQ_PLAN_PROMPT_HPP_
#define ROBOTIQ_PLAN_PROMPT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "robotiq/geom/world.hpp"
#include "robotiq/skills/catalog.hpp"

namespace robotiq::plan {

// Template compiled in from data/prompt_template.txt. Placeholders:
// {{catalog}}, {{manifest}}, {{registries}}, {{user_text}}.
std::string_view default_prompt_template();
std::string load_prompt_template(const std::filesystem::path& path);

// Byte-stable for fixed inputs.
std::string build_prompt(const skills::FunctionCatalog& catalog, std::string_view user_text,
                         const geom::WorldMap& world,
                         std::string_view tmpl = default_prompt_template());

}  // namespace robotiq::plan

#endif  // ROBOTIQ_PLAN_PROMPT_HPP_
