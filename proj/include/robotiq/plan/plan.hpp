#ifndef ROBOTIQ_PLAN_PLAN_HPP_
#define ROBOTIQ_PLAN_PLAN_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robotiq/geom/world.hpp"
#include "robotiq/skills/catalog.hpp"

namespace robotiq::plan {

struct SkillCall {
  std::string fn;
  nlohmann::json args = nlohmann::json::object();

  friend bool operator==(const SkillCall&, const SkillCall&) = default;
};

struct Provenance {
  std::string backend;
  std::string raw;               // model output as received
  double compile_seconds = 0.0;  // wall clock through validation
  int retries = 0;
};

struct Plan {
  std::vector<SkillCall> steps;
  Provenance provenance;
};

// Wire format: [{"fn": ..., "args": {...}}].
nlohmann::json steps_to_json(const std::vector<SkillCall>& steps);
std::vector<SkillCall> steps_from_json(const nlohmann::json& j);

// First JSON array or object in `raw` that reads as a plan. Code fences and
// surrounding prose are skipped. Accepted shapes: a step array, {"steps": [...]},
// {"plan": [...]} or one bare step. Throws Error(kExtraction).
Plan extract_plan(std::string_view raw);

struct Violation {
  int step = -1;     // -1 for whole-plan rules
  std::string rule;  // unknown-function, arity, type, unresolved-reference,
                     // state-precondition, bounds, empty-plan
  std::string message;
};

struct ValidationReport {
  bool accept = false;
  std::vector<Violation> violations;
};

struct ValidationContext {
  std::optional<std::string> held_item;  // robot state before the first step
  double min_meters = 0.01;
  double max_meters = 3.0;
};

ValidationReport validate_plan(const Plan& plan, const skills::FunctionCatalog& catalog,
                               const geom::WorldMap& world, const ValidationContext& ctx = {});

// A plan that passed validation. The only plan type the executor accepts.
class ValidatedPlan {
 public:
  // Nullopt (and the violations in *report) when validation rejects.
  static std::optional<ValidatedPlan> check(Plan plan, const skills::FunctionCatalog& catalog,
                                            const geom::WorldMap& world,
                                            const ValidationContext& ctx = {},
                                            ValidationReport* report = nullptr);

  const Plan& plan() const { return plan_; }
  const std::vector<SkillCall>& steps() const { return plan_.steps; }

 private:
  explicit ValidatedPlan(Plan plan) : plan_(std::move(plan)) {}
  Plan plan_;
};

}  // namespace robotiq::plan

#endif  // ROBOTIQ_PLAN_PLAN_HPP_
