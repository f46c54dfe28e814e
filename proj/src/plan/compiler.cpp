#include "robotiq/plan/compiler.hpp"

#include <chrono>

#include "robotiq/plan/prompt.hpp"

namespace robotiq::plan {

std::string_view to_string(CompileStage s) {
  switch (s) {
    case CompileStage::kParse: return "parse";
    case CompileStage::kBackend: return "backend";
    case CompileStage::kExtract: return "extract";
    case CompileStage::kValidate: return "validate";
  }
  return "unknown";
}

namespace {

std::string describe(const ValidationReport& r) {
  std::string s;
  for (const auto& v : r.violations) {
    s += "\n- step " + std::to_string(v.step) + " [" + v.rule + "] " + v.message;
  }
  return s;
}

}  // namespace

CompileResult compile(std::string_view text, const PlannerBackend& backend,
                      const skills::FunctionCatalog& catalog, const geom::WorldMap& world,
                      const CompileOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool external = std::holds_alternative<ExternalBackend>(backend);
  const std::string prompt = options.prompt_template.empty()
                                 ? build_prompt(catalog, text, world)
                                 : build_prompt(catalog, text, world, options.prompt_template);
  std::vector<ChatMessage> messages = {{"user", prompt}};
  const int attempts = 1 + (external ? std::max(0, options.max_retries) : 0);
  double modeled = 0.0;

  for (int attempt = 0;; ++attempt) {
    BackendReply reply;
    try {
      reply = call_backend(backend, messages, text, world);
    } catch (const Error& e) {
      const bool parse = e.kind() == ErrorKind::kUnparseable || e.kind() == ErrorKind::kInvalidInput;
      throw CompileError(parse ? CompileStage::kParse : CompileStage::kBackend, e.kind(), e.what());
    }
    modeled += reply.elapsed;

    Plan plan;
    try {
      plan = extract_plan(reply.text);
    } catch (const Error& e) {
      if (attempt + 1 >= attempts) throw CompileError(CompileStage::kExtract, e.kind(), e.what());
      messages.push_back({"assistant", reply.text});
      messages.push_back({"user", "That reply contained no JSON plan. Respond ONLY with the JSON array of steps."});
      continue;
    }

    ValidationReport report;
    plan.provenance.backend = backend_id(backend);
    plan.provenance.retries = attempt;
    plan.provenance.compile_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto validated = ValidatedPlan::check(plan, catalog, world, options.validation, &report);
    if (validated) {
      // Rule-based latency is modeled so runs are reproducible; external
      // backends are charged the wall clock through validation.
      const double t_llm = external ? plan.provenance.compile_seconds : modeled;
      return {std::move(*validated), t_llm};
    }
    if (attempt + 1 >= attempts) {
      throw CompileError(CompileStage::kValidate, ErrorKind::kInvalidInput,
                         "plan rejected:" + describe(report), report);
    }
    messages.push_back({"assistant", reply.text});
    messages.push_back({"user", "The plan was rejected:" + describe(report) +
                                    "\nFix these problems and respond ONLY with the corrected JSON plan."});
  }
}

}  // namespace robotiq::plan
