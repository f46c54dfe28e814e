#ifndef ROBOTIQ_PLAN_BACKEND_HPP_
#define ROBOTIQ_PLAN_BACKEND_HPP_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robotiq/geom/world.hpp"

namespace robotiq::plan {

// Grammar-driven backend. Its t_llm is modeled, not measured, so runs are
// reproducible: `latency` seconds per call.
struct RuleBasedBackend {
  double latency = 0.0;
};

// Chat-completions style HTTP endpoint.
struct ExternalBackend {
  std::string endpoint;  // http[s]://host[:port]/path
  std::string model;
  std::string token;     // sent as a bearer token when non-empty
  double timeout = 30.0;
};

using PlannerBackend = std::variant<RuleBasedBackend, ExternalBackend>;

std::string backend_id(const PlannerBackend& backend);

// Reads ROBOTIQ_LLM_ENDPOINT, ROBOTIQ_LLM_MODEL and ROBOTIQ_LLM_TOKEN.
// Throws Error(kSetup) when the endpoint is unset.
ExternalBackend external_backend_from_env(double timeout = 30.0);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct BackendReply {
  std::string text;
  double elapsed = 0.0;  // seconds; modeled for RuleBased, wall clock for External
};

// RuleBased ignores the messages and emits the canonical JSON plan for
// `user_text` (parse errors propagate as Error(kUnparseable)). External
// failures throw Error(kBackend) or Error(kBackendTimeout).
BackendReply call_backend(const PlannerBackend& backend, const std::vector<ChatMessage>& messages,
                          std::string_view user_text, const geom::WorldMap& world);

}  // namespace robotiq::plan

#endif  // ROBOTIQ_PLAN_BACKEND_HPP_
