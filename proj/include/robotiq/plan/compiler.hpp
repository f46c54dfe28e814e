#ifndef ROBOTIQ_PLAN_COMPILER_HPP_
#define ROBOTIQ_PLAN_COMPILER_HPP_

#include <string>
#include <string_view>

#include "robotiq/error.hpp"
#include "robotiq/plan/backend.hpp"
#include "robotiq/plan/plan.hpp"

namespace robotiq::plan {

enum class CompileStage { kParse, kBackend, kExtract, kValidate };
std::string_view to_string(CompileStage s);

class CompileError : public Error {
 public:
  CompileError(CompileStage stage, ErrorKind kind, const std::string& message,
               ValidationReport report = {})
      : Error(kind, message), stage_(stage), report_(std::move(report)) {}

  CompileStage stage() const { return stage_; }
  const ValidationReport& report() const { return report_; }

 private:
  CompileStage stage_;
  ValidationReport report_;
};

struct CompileOptions {
  ValidationContext validation;
  int max_retries = 1;  // External backends only
  std::string prompt_template;  // empty: built-in template
};

struct CompileResult {
  ValidatedPlan plan;
  double t_llm = 0.0;  // seconds
};

// prompt -> backend -> extract -> validate, with validation feedback retries
// for external backends. Throws CompileError.
CompileResult compile(std::string_view text, const PlannerBackend& backend,
                      const skills::FunctionCatalog& catalog, const geom::WorldMap& world,
                      const CompileOptions& options = {});

}  // namespace robotiq::plan

#endif  // ROBOTIQ_PLAN_COMPILER_HPP_
