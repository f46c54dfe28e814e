#include "robotiq/plan/plan.hpp"

#include <cmath>

#include "robotiq/error.hpp"
#include "robotiq/skills/skills.hpp"

namespace robotiq::plan {

using nlohmann::json;

json steps_to_json(const std::vector<SkillCall>& steps) {
  json out = json::array();
  for (const auto& s : steps) out.push_back({{"fn", s.fn}, {"args", s.args}});
  return out;
}

namespace {

std::optional<SkillCall> step_from(const json& j) {
  if (!j.is_object()) return std::nullopt;
  auto fn = j.find("fn");
  if (fn == j.end() || !fn->is_string()) return std::nullopt;
  SkillCall call{fn->get<std::string>(), json::object()};
  if (auto args = j.find("args"); args != j.end()) call.args = *args;
  return call;
}

std::optional<std::vector<SkillCall>> steps_from(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    if (auto s = step_from(j)) return std::vector<SkillCall>{*s};
    auto it = j.find("steps");
    if (it == j.end()) it = j.find("plan");
    if (it == j.end()) return std::nullopt;
    arr = &*it;
  }
  if (!arr->is_array()) return std::nullopt;
  std::vector<SkillCall> steps;
  for (const auto& e : *arr) {
    auto s = step_from(e);
    if (!s) return std::nullopt;
    steps.push_back(std::move(*s));
  }
  return steps;
}

// Index one past the bracket closing the one at `open`, or npos.
size_t matching_close(std::string_view s, size_t open) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::vector<SkillCall> steps_from_json(const json& j) {
  auto steps = steps_from(j);
  if (!steps) throw Error(ErrorKind::kExtraction, "not a plan: expected [{\"fn\": ..., \"args\": {...}}]");
  return *steps;
}

Plan extract_plan(std::string_view raw) {
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '[' && raw[i] != '{') continue;
    const size_t end = matching_close(raw, i);
    if (end == std::string_view::npos) continue;
    const json j = json::parse(raw.substr(i, end - i), nullptr, false);
    if (j.is_discarded()) continue;
    if (auto steps = steps_from(j)) {
      Plan p;
      p.steps = std::move(*steps);
      p.provenance.raw = std::string(raw);
      return p;
    }
    i = end - 1;
  }
  throw Error(ErrorKind::kExtraction, "no JSON plan found in backend output");
}

namespace {

bool resolves_location(const geom::WorldMap& w, const std::string& name) {
  const std::string key = skills::normalize_name(name);
  for (const auto& [loc, p] : w.locations) {
    if (skills::normalize_name(loc) == key) return true;
  }
  return false;
}

std::optional<std::string> resolve_item(const geom::WorldMap& w, const std::string& name) {
  const std::string key = skills::normalize_name(name);
  for (const auto& it : w.items) {
    if (skills::normalize_name(it.name) == key) return it.name;
  }
  return std::nullopt;
}

}  // namespace

ValidationReport validate_plan(const Plan& plan, const skills::FunctionCatalog& catalog,
                               const geom::WorldMap& world, const ValidationContext& ctx) {
  ValidationReport report;
  auto violate = [&](int step, const char* rule, std::string msg) {
    report.violations.push_back({step, rule, std::move(msg)});
  };
  if (plan.steps.empty()) violate(-1, "empty-plan", "plan has no steps");

  std::optional<std::string> held = ctx.held_item;
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    const int idx = static_cast<int>(i);
    const SkillCall& call = plan.steps[i];
    const skills::CatalogEntry* entry = catalog.find(call.fn);
    if (entry == nullptr) {
      violate(idx, "unknown-function", "'" + call.fn + "' is not in the function catalog");
      continue;
    }
    if (!call.args.is_object()) {
      violate(idx, "arity", call.fn + ": args must be an object");
      continue;
    }
    bool shape_ok = true;
    for (const auto& p : entry->params) {
      if (!call.args.contains(p.name)) {
        violate(idx, "arity", call.fn + ": missing argument '" + p.name + "'");
        shape_ok = false;
      }
    }
    for (const auto& [key, value] : call.args.items()) {
      bool known = false;
      for (const auto& p : entry->params) known = known || p.name == key;
      if (!known) {
        violate(idx, "arity", call.fn + ": unexpected argument '" + key + "'");
        shape_ok = false;
      }
    }
    if (!shape_ok) continue;

    std::optional<std::string> item_arg;
    for (const auto& p : entry->params) {
      const json& v = call.args.at(p.name);
      const std::string where = call.fn + "." + p.name;
      switch (p.type) {
        case skills::ParamType::kLocation:
          if (!v.is_string()) {
            violate(idx, "type", where + " must be a location name");
            shape_ok = false;
          } else if (!resolves_location(world, v.get<std::string>())) {
            violate(idx, "unresolved-reference", where + ": unknown location '" + v.get<std::string>() + "'");
            shape_ok = false;
          }
          break;
        case skills::ParamType::kItem:
          if (!v.is_string()) {
            violate(idx, "type", where + " must be an item name");
            shape_ok = false;
          } else if (!(item_arg = resolve_item(world, v.get<std::string>()))) {
            violate(idx, "unresolved-reference", where + ": unknown item '" + v.get<std::string>() + "'");
            shape_ok = false;
          }
          break;
        case skills::ParamType::kMarkerId:
          if (!v.is_number_integer()) {
            violate(idx, "type", where + " must be an integer marker id");
            shape_ok = false;
          } else if (world.find_marker(v.get<int>()) == nullptr) {
            violate(idx, "unresolved-reference", where + ": no marker " + std::to_string(v.get<int>()));
            shape_ok = false;
          }
          break;
        case skills::ParamType::kMeters:
          if (!v.is_number() || !std::isfinite(v.get<double>())) {
            violate(idx, "type", where + " must be a number of meters");
            shape_ok = false;
          } else if (v.get<double>() < ctx.min_meters || v.get<double>() > ctx.max_meters) {
            violate(idx, "bounds", where + " = " + v.dump() + " outside [" + json(ctx.min_meters).dump() +
                                       ", " + json(ctx.max_meters).dump() + "]");
            shape_ok = false;
          }
          break;
      }
    }
    if (!shape_ok) continue;

    // Symbolic hand state across the sequence.
    if (call.fn == "pick") {
      if (held) {
        violate(idx, "state-precondition", "pick '" + *item_arg + "' while holding '" + *held + "'");
      }
      held = item_arg;
    } else if (call.fn == "place") {
      if (!held) {
        violate(idx, "state-precondition", "place '" + *item_arg + "' with nothing held");
      } else if (*held != *item_arg) {
        violate(idx, "state-precondition", "place '" + *item_arg + "' while holding '" + *held + "'");
      }
      held.reset();
    }
  }
  report.accept = report.violations.empty();
  return report;
}

std::optional<ValidatedPlan> ValidatedPlan::check(Plan plan, const skills::FunctionCatalog& catalog,
                                                  const geom::WorldMap& world,
                                                  const ValidationContext& ctx,
                                                  ValidationReport* report) {
  ValidationReport r = validate_plan(plan, catalog, world, ctx);
  const bool ok = r.accept;
  if (report != nullptr) *report = std::move(r);
  if (!ok) return std::nullopt;
  return ValidatedPlan(std::move(plan));
}

}  // namespace robotiq::plan
