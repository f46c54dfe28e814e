#include "robotiq/plan/prompt.hpp"

#include <fstream>
#include <sstream>

#include "robotiq/error.hpp"
#include "robotiq/prompt_template.hpp"

namespace robotiq::plan {

std::string_view default_prompt_template() { return detail::kPromptTemplate; }

std::string load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kNotFound, "prompt template not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void replace_all(std::string& s, std::string_view key, const std::string& value) {
  for (size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
}

}  // namespace

std::string build_prompt(const skills::FunctionCatalog& catalog, std::string_view user_text,
                         const geom::WorldMap& world, std::string_view tmpl) {
  std::string functions;
  for (const auto& e : catalog.entries) functions += "- " + skills::signature_line(e) + ": " + e.doc + "\n";
  if (functions.empty()) functions = "(no functions available: answer with an empty array [])\n";
  functions.pop_back();

  std::string reg = "locations:";
  for (const auto& [name, p] : world.locations) reg += " " + name;
  if (world.locations.empty()) reg += " (none)";
  reg += "\nitems:";
  for (const auto& it : world.items) reg += " " + it.name;
  if (world.items.empty()) reg += " (none)";
  reg += "\nmarkers:";
  for (const auto& m : world.markers) reg += " " + std::to_string(m.id);
  if (world.markers.empty()) reg += " (none)";

  std::string out(tmpl);
  // User text last so braces inside it are never mistaken for placeholders.
  replace_all(out, "{{catalog}}", functions);
  replace_all(out, "{{manifest}}", skills::catalog_manifest(catalog).dump());
  replace_all(out, "{{registries}}", reg);
  replace_all(out, "{{user_text}}", std::string(user_text));
  return out;
}

}  // namespace robotiq::plan
