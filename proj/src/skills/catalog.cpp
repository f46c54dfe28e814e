#include "robotiq/skills/catalog.hpp"

#include <set>

#include "robotiq/error.hpp"
#include "robotiq/skills/skills.hpp"

namespace robotiq::skills {

using nlohmann::json;

std::string_view to_string(ParamType t) {
  switch (t) {
    case ParamType::kLocation: return "location";
    case ParamType::kItem: return "item";
    case ParamType::kMarkerId: return "marker_id";
    case ParamType::kMeters: return "meters";
  }
  return "unknown";
}

ParamType param_type_from_string(std::string_view s) {
  if (s == "location") return ParamType::kLocation;
  if (s == "item") return ParamType::kItem;
  if (s == "marker_id") return ParamType::kMarkerId;
  if (s == "meters") return ParamType::kMeters;
  throw Error(ErrorKind::kCatalog, "unknown parameter type '" + std::string(s) + "'");
}

const CatalogEntry* FunctionCatalog::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

FunctionCatalog default_catalog() {
  using P = ParamType;
  return {{
      {"go_to", {{"location", P::kLocation}}, "Drive to a named location."},
      {"approach", {{"marker_id", P::kMarkerId}, {"x", P::kMeters}},
       "Servo toward a fiducial marker and stop x meters in front of it."},
      {"leave", {{"x", P::kMeters}}, "Turn around and drive until x meters from the current spot."},
      {"pick", {{"item", P::kItem}}, "Pick up an item within reach in front of the robot."},
      {"place", {{"item", P::kItem}}, "Put the held item down in front of the robot."},
      {"get_position", {{"name", P::kLocation}}, "Look up the coordinates of a named location."},
  }};
}

json catalog_manifest(const FunctionCatalog& catalog) {
  json out = json::array();
  for (const auto& e : catalog.entries) {
    json params = json::array();
    for (const auto& p : e.params) params.push_back({{"name", p.name}, {"type", std::string(to_string(p.type))}});
    out.push_back({{"name", e.name}, {"params", params}, {"doc", e.doc}});
  }
  return out;
}

FunctionCatalog catalog_from_manifest(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::kCatalog, "catalog manifest must be a JSON array");
  FunctionCatalog c;
  std::set<std::string> seen;
  for (const auto& e : j) {
    CatalogEntry entry;
    entry.name = e.at("name").get<std::string>();
    entry.doc = e.value("doc", std::string());
    for (const auto& p : e.value("params", json::array())) {
      entry.params.push_back({p.at("name").get<std::string>(),
                              param_type_from_string(p.at("type").get<std::string>())});
    }
    if (!seen.insert(entry.name).second) {
      throw Error(ErrorKind::kCatalog, "duplicate catalog entry '" + entry.name + "'");
    }
    c.entries.push_back(std::move(entry));
  }
  return c;
}

void check_catalog_closure(const FunctionCatalog& catalog) {
  for (const auto& e : catalog.entries) {
    if (!SkillRunner::has_binding(e.name)) {
      throw Error(ErrorKind::kCatalog, "catalog entry '" + e.name + "' has no skill binding");
    }
  }
}

std::string signature_line(const CatalogEntry& entry) {
  std::string s = entry.name + "(";
  for (size_t i = 0; i < entry.params.size(); ++i) {
    if (i > 0) s += ", ";
    s += entry.params[i].name + ": " + std::string(to_string(entry.params[i].type));
  }
  return s + ")";
}

}  // namespace robotiq::skills
