#ifndef ROBOTIQ_SERVICE_SESSION_HPP_
#define ROBOTIQ_SERVICE_SESSION_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robotiq/geom/world.hpp"
#include "robotiq/plan/backend.hpp"
#include "robotiq/plan/compiler.hpp"
#include "robotiq/service/metrics.hpp"
#include "robotiq/skills/catalog.hpp"
#include "robotiq/skills/skills.hpp"

namespace robotiq::service {

// Wire schema: {seq, type, t_sim, payload}. Types: state, plan,
// step_started, step_finished, error.
struct Event {
  std::uint64_t seq = 0;
  std::string type;
  double t_sim = 0.0;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

// Ordered per-session event log with fan-out. Each subscriber reads the
// same sequence from its own cursor; the oldest events are dropped past
// `capacity`.
class EventHub {
 public:
  explicit EventHub(size_t capacity = 20000) : capacity_(capacity) {}

  std::uint64_t publish(std::string type, double t_sim, nlohmann::json payload);

  // Blocks until an event with seq >= *cursor exists, the hub closes or the
  // timeout passes. Advances the cursor on success.
  std::optional<Event> next(std::uint64_t& cursor, std::chrono::milliseconds timeout);

  std::uint64_t next_seq() const;
  std::vector<Event> snapshot() const;
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> events_;
  std::uint64_t next_seq_ = 1;
  size_t capacity_;
  bool closed_ = false;
};

struct SessionConfig {
  plan::PlannerBackend backend = plan::RuleBasedBackend{};
  skills::Navigator navigator = skills::FallbackNavigator{};
  skills::SkillConfig skills;
  double voice_latency = 0.0;  // added to every command's t_llm
  int lidar_rays = 25;         // in state events
  bool stream = true;          // publish events
  std::uint64_t seed = 0;
  std::optional<geom::Pose2D> start;  // overrides the map's start pose
};

struct CommandOutcome {
  bool compiled = false;
  std::vector<TaskRecord> records;
  nlohmann::json plan = nlohmann::json::array();
  double t_llm = 0.0;
  // Set when compilation failed; nothing was executed.
  std::optional<std::string> error_stage;
  std::string error_kind;
  std::string error_message;
  std::vector<plan::Violation> violations;

  nlohmann::json to_json() const;
};

class Session {
 public:
  Session(std::string id, geom::WorldMap map, SessionConfig cfg);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Throws Error(kNotFound) for a missing map and parse/invariant errors
  // with field paths.
  static std::unique_ptr<Session> from_file(std::string id, const std::filesystem::path& map,
                                            SessionConfig cfg);

  const std::string& id() const { return id_; }

  // Compile then execute step by step. Each step gets the per-skill time
  // budget; the first failure aborts the rest (recorded as failures).
  // Throws Error(kBusy) if a command is already running.
  CommandOutcome submit_command(const std::string& text);

  // Robot, arm, gripper, items and lidar ranges.
  nlohmann::json state_json() const;
  void publish_state();
  bool busy() const { return busy_.load(); }
  void cancel() { cancel_.store(true); }

  std::vector<TaskRecord> records() const;
  MetricsReport metrics() const;
  EventHub& events() { return hub_; }
  double clock() const;
  const geom::WorldMap& world() const { return world_; }
  const skills::RobotState& robot() const { return robot_; }

 private:
  nlohmann::json state_payload() const;
  void refresh_snapshot(double t);
  void emit(const std::string& type, nlohmann::json payload);

  std::string id_;
  geom::WorldMap world_;
  skills::RobotState robot_;
  SessionConfig cfg_;
  skills::FunctionCatalog catalog_;
  std::unique_ptr<skills::SkillRunner> runner_;
  std::mutex exec_mu_;  // world, robot and runner while a command runs
  std::atomic<bool> busy_{false};
  std::atomic<bool> cancel_{false};
  mutable std::mutex snap_mu_;  // snapshot_, clock_ and records_
  nlohmann::json snapshot_;
  double clock_ = 0.0;
  std::vector<TaskRecord> records_;
  EventHub hub_;
};

// "go_to(kitchen)", "approach(1 0.3)".
std::string task_label(const plan::SkillCall& call);

}  // namespace robotiq::service

#endif  // ROBOTIQ_SERVICE_SESSION_HPP_
