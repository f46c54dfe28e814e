#ifndef ROBOTIQ_SKILLS_CATALOG_HPP_
#define ROBOTIQ_SKILLS_CATALOG_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace robotiq::skills {

enum class ParamType { kLocation, kItem, kMarkerId, kMeters };

std::string_view to_string(ParamType t);
ParamType param_type_from_string(std::string_view s);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kMeters;
};

struct CatalogEntry {
  std::string name;
  std::vector<ParamSpec> params;
  std::string doc;
};

struct FunctionCatalog {
  std::vector<CatalogEntry> entries;

  const CatalogEntry* find(std::string_view name) const;
};

// go_to, approach, leave, pick, place, get_position.
FunctionCatalog default_catalog();

// The manifest document: [{name, params: [{name, type}], doc}].
nlohmann::json catalog_manifest(const FunctionCatalog& catalog);
// Throws Error(kCatalog) on duplicate names or unknown parameter types.
FunctionCatalog catalog_from_manifest(const nlohmann::json& j);

// Throws Error(kCatalog) when an entry has no executable skill binding.
void check_catalog_closure(const FunctionCatalog& catalog);

// "go_to(location: location)"
std::string signature_line(const CatalogEntry& entry);

}  // namespace robotiq::skills

#endif  // ROBOTIQ_SKILLS_CATALOG_HPP_
