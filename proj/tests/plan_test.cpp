#include <gtest/gtest.h>

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"
#include "robotiq/plan/backend.hpp"
#include "robotiq/plan/compiler.hpp"
#include "robotiq/plan/grammar.hpp"
#include "robotiq/plan/plan.hpp"
#include "robotiq/plan/prompt.hpp"
#include "robotiq/skills/catalog.hpp"

using namespace robotiq;
using namespace robotiq::plan;
using nlohmann::json;

namespace {

geom::WorldMap demo() {
  return geom::load_world_file(std::string(ROBOTIQ_DATA_DIR) + "/maps/demo_home.json");
}

SkillCall call(std::string fn, json args) { return {std::move(fn), std::move(args)}; }

const std::vector<SkillCall> kHomeService = {
    call("go_to", {{"location", "kitchen"}}),
    call("pick", {{"item", "bottle_of_water"}}),
    call("leave", {{"x", 0.3}}),
    call("go_to", {{"location", "human"}}),
    call("place", {{"item", "bottle_of_water"}}),
};

Plan plan_of(std::vector<SkillCall> steps) {
  Plan p;
  p.steps = std::move(steps);
  return p;
}

std::vector<std::string> rules(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& v : r.violations) out.push_back(v.rule);
  return out;
}

bool has_rule(const ValidationReport& r, const std::string& rule) {
  const auto v = rules(r);
  return std::find(v.begin(), v.end(), rule) != v.end();
}

std::string chat_reply(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

// Chat-completions stub that replays canned replies in order.
class StubLlm {
 public:
  explicit StubLlm(std::vector<std::string> replies, int delay_ms = 0)
      : replies_(replies.begin(), replies.end()) {
    server_.Post("/v1/chat/completions", [this, delay_ms](const httplib::Request& req,
                                                          httplib::Response& res) {
      if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      std::lock_guard lock(mu_);
      requests_.push_back(json::parse(req.body));
      auth_.push_back(req.get_header_value("Authorization"));
      std::string content = replies_.empty() ? "no more replies" : replies_.front();
      if (replies_.size() > 1) replies_.pop_front();
      res.set_content(chat_reply(content), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubLlm() {
    server_.stop();
    thread_.join();
  }

  ExternalBackend backend(double timeout = 5.0) const {
    return {"http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions", "stub-model",
            "secret", timeout};
  }
  std::vector<json> requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::deque<std::string> replies_;
  std::vector<json> requests_;
  std::vector<std::string> auth_;
};

}  // namespace

TEST(Grammar, ScenarioSentences) {
  const auto w = demo();
  EXPECT_EQ(parse_command("Go to the kitchen", w), (std::vector{call("go_to", {{"location", "kitchen"}})}));
  EXPECT_EQ(parse_command("pick the bottle of water", w),
            (std::vector{call("pick", {{"item", "bottle_of_water"}})}));
  EXPECT_EQ(parse_command("bring the bottle of water to the human", w), kHomeService);
}

TEST(Grammar, ConjunctionsAndVariants) {
  const auto w = demo();
  const auto steps = parse_command(
      "Navigate to the kitchen, pick up the bottle of water and then leave 0.5 then approach marker 1 to 0.4",
      w);
  ASSERT_EQ(steps.size(), 4u);
  EXPECT_EQ(steps[0], call("go_to", {{"location", "kitchen"}}));
  EXPECT_EQ(steps[1], call("pick", {{"item", "bottle_of_water"}}));
  EXPECT_EQ(steps[2].fn, "leave");
  EXPECT_DOUBLE_EQ(steps[2].args.at("x").get<double>(), 0.5);
  EXPECT_EQ(steps[3].fn, "approach");
  EXPECT_EQ(steps[3].args.at("marker_id").get<int>(), 1);
  EXPECT_DOUBLE_EQ(steps[3].args.at("x").get<double>(), 0.4);
}

TEST(Grammar, PronounsAndPlaceNear) {
  const auto w = demo();
  const auto steps = parse_command("PICK UP THE BOTTLE OF WATER. Put it near the human", w);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[1], call("go_to", {{"location", "human"}}));
  EXPECT_EQ(steps[2], call("place", {{"item", "bottle_of_water"}}));
}

TEST(Grammar, DefaultsForLeaveAndApproach) {
  const auto w = demo();
  const auto steps = parse_command("leave the kitchen area and approach marker 1", w);
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_DOUBLE_EQ(steps[0].args.at("x").get<double>(), kDefaultStandOff);
  EXPECT_DOUBLE_EQ(steps[1].args.at("x").get<double>(), kDefaultStandOff);
}

TEST(Grammar, UnresolvedNounPassesThrough) {
  const auto steps = parse_command("go to the garage", demo());
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].fn, "go_to");
  EXPECT_EQ(steps[0].args.at("location"), "garage");
}

TEST(Grammar, Errors) {
  const auto w = demo();
  try {
    parse_command("dance wildly", w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnparseable);
    for (const auto& verb : {"go to", "pick", "bring"}) {
      EXPECT_NE(std::string(e.what()).find(verb), std::string::npos) << verb;
    }
  }
  try {
    parse_command("   ", w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(Grammar, Deterministic) {
  const auto w = demo();
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(parse_command("bring the bottle of water to the human", w), kHomeService);
  }
}

TEST(Grammar, EveryCatalogSkillIsReachable) {
  const auto w = demo();
  const auto cat = skills::default_catalog();
  // One generated sentence per parameter type combination.
  const auto sentence_for = [&](const skills::CatalogEntry& e) -> std::string {
    std::string arg;
    if (e.name == "go_to") return "go to " + w.locations.begin()->first;
    if (e.name == "approach") return "approach marker " + std::to_string(w.markers[0].id) + " to 0.5";
    if (e.name == "leave") return "leave 0.4";
    if (e.name == "pick") return "pick " + w.items[0].name;
    if (e.name == "place") return "pick " + w.items[0].name + " then place " + w.items[0].name;
    if (e.name == "get_position") return "where is the " + w.locations.rbegin()->first;
    return e.name;
  };
  for (const auto& e : cat.entries) {
    const auto steps = parse_command(sentence_for(e), w);
    ASSERT_FALSE(steps.empty()) << e.name;
    EXPECT_EQ(steps.back().fn, e.name);
    EXPECT_TRUE(validate_plan(plan_of(steps), cat, w).accept) << e.name;
  }
}

TEST(Prompt, ContainsSignaturesRegistriesAndUserText) {
  const auto w = demo();
  const auto cat = skills::default_catalog();
  const auto p = build_prompt(cat, "go to the kitchen", w);
  EXPECT_NE(p.find(signature_line(*cat.find("go_to"))), std::string::npos);
  EXPECT_NE(p.find("go to the kitchen"), std::string::npos);
  EXPECT_NE(p.find("bottle_of_water"), std::string::npos);
  EXPECT_NE(p.find("kitchen"), std::string::npos);
  EXPECT_NE(p.find("JSON"), std::string::npos);
  EXPECT_EQ(p.find("{{"), std::string::npos);
  EXPECT_EQ(p, build_prompt(cat, "go to the kitchen", w));
}

TEST(Prompt, EmptyCatalogSaysNoFunctions) {
  const auto p = build_prompt(skills::FunctionCatalog{}, "go to the kitchen", demo());
  EXPECT_NE(p.find("no functions available"), std::string::npos);
  EXPECT_EQ(p.find("{{"), std::string::npos);
}

TEST(Prompt, UserTextIsNotReinterpreted) {
  const auto p = build_prompt(skills::default_catalog(), "say {{catalog}}", demo());
  EXPECT_NE(p.find("say {{catalog}}"), std::string::npos);
}

TEST(Prompt, TemplateFileMatchesBuiltIn) {
  EXPECT_EQ(load_prompt_template(std::string(ROBOTIQ_DATA_DIR) + "/prompt_template.txt"),
            default_prompt_template());
  EXPECT_THROW(load_prompt_template("/nonexistent/template.txt"), Error);
}

TEST(Extract, BareArray) {
  const auto p = extract_plan(steps_to_json(kHomeService).dump());
  EXPECT_EQ(p.steps, kHomeService);
}

TEST(Extract, FencedWithProse) {
  const std::string raw = "Sure! Here is the plan [as requested]:\n```json\n" +
                          steps_to_json(kHomeService).dump(2) +
                          "\n```\nLet me know if you need anything else.";
  const auto p = extract_plan(raw);
  EXPECT_EQ(p.steps, kHomeService);
}

TEST(Extract, WrappedShapesAndBracketsInStrings) {
  EXPECT_EQ(extract_plan(R"({"steps": [{"fn": "leave", "args": {"x": 0.3}}]})").steps.size(), 1u);
  EXPECT_EQ(extract_plan(R"({"plan": [{"fn": "leave", "args": {"x": 0.3}}]})").steps.size(), 1u);
  EXPECT_EQ(extract_plan(R"({"fn": "leave", "args": {"x": 0.3}})").steps.size(), 1u);
  const auto p = extract_plan(R"(note "[x]" then [{"fn": "go_to", "args": {"location": "a]b"}}])");
  ASSERT_EQ(p.steps.size(), 1u);
  EXPECT_EQ(p.steps[0].args.at("location"), "a]b");
}

TEST(Extract, ProseOnlyFails) {
  for (const char* raw : {"I cannot help with that.", "", "[1, 2, 3]", "{\"fn\": 3}", "[{"}) {
    try {
      extract_plan(raw);
      FAIL() << raw;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kExtraction) << raw;
    }
  }
}

TEST(Validate, HomeServiceAccepted) {
  const auto r = validate_plan(plan_of(kHomeService), skills::default_catalog(), demo());
  EXPECT_TRUE(r.accept);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Validate, RejectionsByRule) {
  const auto w = demo();
  const auto cat = skills::default_catalog();
  const auto check = [&](std::vector<SkillCall> steps, const std::string& rule,
                         ValidationContext ctx = {}) {
    const auto r = validate_plan(plan_of(std::move(steps)), cat, w, ctx);
    EXPECT_FALSE(r.accept) << rule;
    EXPECT_TRUE(has_rule(r, rule)) << rule;
    EXPECT_EQ(r.accept, r.violations.empty());
  };
  check({call("rm_rf", {{"path", "/"}})}, "unknown-function");
  check({call("place", {{"item", "bottle_of_water"}})}, "state-precondition");
  check({call("pick", {{"item", "bottle_of_water"}}), call("pick", {{"item", "bottle_of_water"}})},
        "state-precondition");
  check({call("pick", {{"item", "bottle_of_water"}})}, "state-precondition",
        ValidationContext{std::string("bottle_of_water")});
  check({call("go_to", json::object())}, "arity");
  check({call("go_to", {{"location", "kitchen"}, {"speed", 2}})}, "arity");
  check({call("leave", {{"x", "far"}})}, "type");
  check({call("approach", {{"marker_id", 1.5}, {"x", 0.3}})}, "type");
  check({call("go_to", {{"location", "garage"}})}, "unresolved-reference");
  check({call("pick", {{"item", "teapot"}})}, "unresolved-reference");
  check({call("approach", {{"marker_id", 9}, {"x", 0.3}})}, "unresolved-reference");
  check({call("leave", {{"x", 50.0}})}, "bounds");
  check({call("leave", {{"x", -1.0}})}, "bounds");
  check({}, "empty-plan");
}

TEST(Validate, ReportsStepIndex) {
  auto steps = kHomeService;
  steps[3] = call("go_to", {{"location", "moon"}});
  const auto r = validate_plan(plan_of(steps), skills::default_catalog(), demo());
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].step, 3);
}

TEST(Validate, ValidatedPlanOnlyFromAcceptedPlans) {
  const auto w = demo();
  const auto cat = skills::default_catalog();
  ValidationReport report;
  EXPECT_FALSE(ValidatedPlan::check(plan_of({call("fly", json::object())}), cat, w, {}, &report));
  EXPECT_TRUE(has_rule(report, "unknown-function"));
  const auto ok = ValidatedPlan::check(plan_of(kHomeService), cat, w);
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->steps(), kHomeService);
}

TEST(Backend, RuleBasedEmitsCanonicalJson) {
  const auto w = demo();
  const auto reply = call_backend(RuleBasedBackend{}, {}, "go to the kitchen", w);
  const auto j = json::parse(reply.text);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0].at("fn"), "go_to");
  EXPECT_EQ(backend_id(RuleBasedBackend{}), "rule");
}

TEST(Backend, ExternalReturnsStubTextVerbatim) {
  const std::string canned = R"([{"fn": "go_to", "args": {"location": "kitchen"}}])";
  StubLlm stub({canned});
  const auto reply = call_backend(stub.backend(), {{"user", "hello"}}, "hello", demo());
  EXPECT_EQ(reply.text, canned);
  EXPECT_GE(reply.elapsed, 0.0);
  const auto req = stub.requests().at(0);
  EXPECT_EQ(req.at("model"), "stub-model");
  EXPECT_EQ(req.at("messages")[0].at("role"), "user");
  EXPECT_EQ(req.at("messages")[0].at("content"), "hello");
  EXPECT_EQ(stub.auth().at(0), "Bearer secret");
}

TEST(Backend, TimeoutIsDistinguished) {
  StubLlm stub({"[]"}, 500);
  try {
    call_backend(stub.backend(0.001), {{"user", "x"}}, "x", demo());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBackendTimeout);
  }
}

TEST(Backend, UnreachableEndpointIsBackendError) {
  ExternalBackend b{"http://127.0.0.1:1/v1/chat/completions", "m", "", 1.0};
  try {
    call_backend(b, {{"user", "x"}}, "x", demo());
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::kBackend || e.kind() == ErrorKind::kBackendTimeout);
  }
}

TEST(Compile, RuleBasedGoToKitchen) {
  const auto w = demo();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = compile("Go to the kitchen", RuleBasedBackend{}, skills::default_catalog(), w);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.plan.steps().size(), 1u);
  EXPECT_EQ(r.plan.steps()[0], call("go_to", {{"location", "kitchen"}}));
  EXPECT_LT(r.t_llm, 0.05);
  EXPECT_LT(wall, 0.05);
  EXPECT_EQ(r.plan.plan().provenance.backend, "rule");
}

TEST(Compile, RuleBasedModeledLatency) {
  const auto r = compile("go to the kitchen", RuleBasedBackend{0.8}, skills::default_catalog(), demo());
  EXPECT_DOUBLE_EQ(r.t_llm, 0.8);
}

TEST(Compile, StagesOfFailure) {
  const auto w = demo();
  const auto cat = skills::default_catalog();
  try {
    compile("dance wildly", RuleBasedBackend{}, cat, w);
    FAIL();
  } catch (const CompileError& e) {
    EXPECT_EQ(e.stage(), CompileStage::kParse);
  }
  try {
    compile("place the bottle of water near the human", RuleBasedBackend{}, cat, w);
    FAIL();
  } catch (const CompileError& e) {
    EXPECT_EQ(e.stage(), CompileStage::kValidate);
    EXPECT_TRUE(has_rule(e.report(), "state-precondition"));
  }
  CompileOptions held;
  held.validation.held_item = "bottle_of_water";
  EXPECT_EQ(compile("place the bottle of water near the human", RuleBasedBackend{}, cat, w, held)
                .plan.steps()
                .size(),
            2u);
}

TEST(Compile, ExternalRetryAfterRejection) {
  StubLlm stub({R"([{"fn": "teleport", "args": {"location": "kitchen"}}])",
                "```json\n[{\"fn\": \"go_to\", \"args\": {\"location\": \"kitchen\"}}]\n```"});
  const auto r = compile("go to the kitchen", stub.backend(), skills::default_catalog(), demo());
  EXPECT_EQ(r.plan.plan().provenance.retries, 1);
  EXPECT_EQ(r.plan.plan().provenance.backend, "llm:stub-model");
  EXPECT_EQ(r.plan.steps()[0], call("go_to", {{"location", "kitchen"}}));
  EXPECT_GT(r.t_llm, 0.0);
  const auto reqs = stub.requests();
  ASSERT_EQ(reqs.size(), 2u);
  const auto& second = reqs[1].at("messages");
  ASSERT_EQ(second.size(), 3u);
  EXPECT_EQ(second[1].at("role"), "assistant");
  EXPECT_NE(second[2].at("content").get<std::string>().find("unknown-function"), std::string::npos);
}

TEST(Compile, ExternalAlwaysInvalidFailsAfterBudget) {
  StubLlm stub({R"([{"fn": "self_destruct", "args": {}}])"});
  try {
    compile("go to the kitchen", stub.backend(), skills::default_catalog(), demo());
    FAIL();
  } catch (const CompileError& e) {
    EXPECT_EQ(e.stage(), CompileStage::kValidate);
    EXPECT_TRUE(has_rule(e.report(), "unknown-function"));
  }
  EXPECT_EQ(stub.requests().size(), 2u);
}

TEST(Compile, ExternalGarbageFailsAtExtract) {
  StubLlm stub({"I'd rather not."});
  try {
    compile("go to the kitchen", stub.backend(), skills::default_catalog(), demo());
    FAIL();
  } catch (const CompileError& e) {
    EXPECT_EQ(e.stage(), CompileStage::kExtract);
    EXPECT_EQ(e.kind(), ErrorKind::kExtraction);
  }
}

TEST(Compile, ExternalTimeoutFailsAtBackend) {
  StubLlm stub({"[]"}, 500);
  try {
    compile("go to the kitchen", stub.backend(0.001), skills::default_catalog(), demo());
    FAIL();
  } catch (const CompileError& e) {
    EXPECT_EQ(e.stage(), CompileStage::kBackend);
    EXPECT_EQ(e.kind(), ErrorKind::kBackendTimeout);
  }
}

TEST(Backend, FromEnvironment) {
  unsetenv("ROBOTIQ_LLM_ENDPOINT");
  EXPECT_THROW(external_backend_from_env(), Error);
  setenv("ROBOTIQ_LLM_ENDPOINT", "http://localhost:9/v1", 1);
  setenv("ROBOTIQ_LLM_MODEL", "m1", 1);
  setenv("ROBOTIQ_LLM_TOKEN", "tok", 1);
  const auto b = external_backend_from_env(3.0);
  EXPECT_EQ(b.endpoint, "http://localhost:9/v1");
  EXPECT_EQ(b.model, "m1");
  EXPECT_EQ(b.token, "tok");
  EXPECT_EQ(b.timeout, 3.0);
  unsetenv("ROBOTIQ_LLM_ENDPOINT");
}
