#include "robotiq/plan/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "robotiq/error.hpp"
#include "robotiq/plan/grammar.hpp"

namespace robotiq::plan {

using nlohmann::json;

std::string backend_id(const PlannerBackend& backend) {
  if (std::holds_alternative<RuleBasedBackend>(backend)) return "rule";
  const auto& e = std::get<ExternalBackend>(backend);
  return "llm:" + (e.model.empty() ? std::string("default") : e.model);
}

ExternalBackend external_backend_from_env(double timeout) {
  const auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return std::string(v != nullptr ? v : "");
  };
  ExternalBackend b;
  b.endpoint = env("ROBOTIQ_LLM_ENDPOINT");
  b.model = env("ROBOTIQ_LLM_MODEL");
  b.token = env("ROBOTIQ_LLM_TOKEN");
  b.timeout = timeout;
  if (b.endpoint.empty()) throw Error(ErrorKind::kSetup, "ROBOTIQ_LLM_ENDPOINT is not set");
  return b;
}

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::kSetup, "backend endpoint must start with http:// or https://: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string reply_text(const json& body) {
  if (auto c = body.find("choices"); c != body.end() && c->is_array() && !c->empty()) {
    const json& first = c->front();
    if (auto m = first.find("message"); m != first.end() && m->contains("content") && (*m)["content"].is_string()) {
      return (*m)["content"].get<std::string>();
    }
    if (auto t = first.find("text"); t != first.end() && t->is_string()) return t->get<std::string>();
  }
  if (auto t = body.find("content"); t != body.end() && t->is_string()) return t->get<std::string>();
  throw Error(ErrorKind::kBackend, "backend response has no choices[0].message.content");
}

BackendReply call_external(const ExternalBackend& b, const std::vector<ChatMessage>& messages) {
  if (!(b.timeout > 0.0)) throw Error(ErrorKind::kSetup, "backend timeout must be > 0");
  const Url url = split_url(b.endpoint);
  json body = {{"model", b.model}, {"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Client client(url.origin);
  const auto secs = static_cast<time_t>(std::floor(b.timeout));
  const auto usecs = static_cast<time_t>(std::round((b.timeout - static_cast<double>(secs)) * 1e6));
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!b.token.empty()) headers.emplace("Authorization", "Bearer " + b.token);

  const auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= 0.9 * b.timeout);
    if (timed_out) {
      throw Error(ErrorKind::kBackendTimeout, "backend did not answer within " + json(b.timeout).dump() + " s");
    }
    throw Error(ErrorKind::kBackend, "backend request failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::kBackend, "backend returned HTTP " + std::to_string(res->status));
  }
  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw Error(ErrorKind::kBackend, "backend response is not JSON");
  return {reply_text(reply), elapsed};
}

}  // namespace

BackendReply call_backend(const PlannerBackend& backend, const std::vector<ChatMessage>& messages,
                          std::string_view user_text, const geom::WorldMap& world) {
  if (const auto* rule = std::get_if<RuleBasedBackend>(&backend)) {
    return {steps_to_json(parse_command(user_text, world)).dump(), rule->latency};
  }
  return call_external(std::get<ExternalBackend>(backend), messages);
}

}  // namespace robotiq::plan
