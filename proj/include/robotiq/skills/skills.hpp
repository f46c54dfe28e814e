#ifndef ROBOTIQ_SKILLS_SKILLS_HPP_
#define ROBOTIQ_SKILLS_SKILLS_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "robotiq/geom/world.hpp"
#include "robotiq/rl/checkpoint.hpp"
#include "robotiq/skills/gripper.hpp"
#include "robotiq/skills/perception.hpp"
#include "robotiq/skills/robot.hpp"

namespace robotiq::skills {

enum class SkillStatus { kSuccess, kFailure, kTimeout };
std::string_view to_string(SkillStatus s);

struct TraceSample {
  double t = 0.0;  // session clock, s
  geom::Pose2D pose;
  ArmState arm = ArmState::kHome;
  double gripper_opening = 0.0;
  std::string held_item;  // empty when nothing is held
};

struct SkillResult {
  SkillStatus status = SkillStatus::kSuccess;
  double duration = 0.0;  // simulated seconds
  std::string reason;     // empty on success
  std::vector<TraceSample> trace;

  bool ok() const { return status == SkillStatus::kSuccess; }
};

// JSON lines, one timestamped state snapshot per trace sample.
std::string trace_jsonl(const SkillResult& result);

// Proportional heading controller with a stop-on-obstacle shield.
struct FallbackNavigator {
  double k_heading = 2.0;
  double k_distance = 1.0;  // forward speed = min(v_max, k_distance * D) * max(cos phi, 0)
};

// Frozen policy; the checkpoint's env config supplies v, dt and goal_radius.
struct PolicyNavigator {
  std::shared_ptr<const rl::Checkpoint> checkpoint;
};

using Navigator = std::variant<FallbackNavigator, PolicyNavigator>;

struct SkillConfig {
  double robot_radius = 0.22;
  double v_max = 0.2;
  double omega_max = 1.5;
  double control_dt = 0.1;
  double goal_radius = 0.05;  // fallback navigator arrival radius
  double time_limit = 30.0;   // per skill call, simulated
  CameraSpec camera;
  NoiseSpec noise;
  // approach
  double k_range = 0.8;
  double k_bearing = 1.5;
  double approach_range_tol = 0.02;
  double approach_bearing_tol = 0.05235987755982988;  // 3 degrees
  int approach_window = 5;      // observations averaged for the stop test
  double lost_budget = 2.0;     // seconds without a sighting before giving up
  // manipulation
  double reach_radius = 0.25;
  double reach_bearing = 0.5235987755982988;  // 30 degrees
  double arm_phase_duration = 1.5;
  double place_offset = 0.2;
  double max_opening = 0.02;
  double gripper_a_peak = 1.0;
};

SkillConfig skill_config_from_json(const nlohmann::json& j);

// Called once per control period (and per arm-phase tick) with the clock.
using TickObserver = std::function<void(double t, const RobotState&)>;

// Executes skills against one world and one robot. Not thread safe; a
// session owns exactly one runner.
class SkillRunner {
 public:
  SkillRunner(geom::WorldMap& world, RobotState& robot, SkillConfig cfg, Navigator navigator,
              std::uint64_t seed);

  void set_observer(TickObserver observer) { observer_ = std::move(observer); }
  // Checked every control period; a set flag ends the skill as a failure.
  void set_cancel_flag(const std::atomic<bool>* flag) { cancel_ = flag; }

  double clock() const { return clock_; }
  const SkillConfig& config() const { return cfg_; }
  const RobotState& robot() const { return robot_; }
  const geom::WorldMap& world() const { return world_; }

  // Unknown names throw Error(kCatalog). Failures are results, not exceptions.
  SkillResult go_to(const std::string& location);
  SkillResult go_to_point(geom::Vec2 goal);
  SkillResult approach(int marker_id, double x);
  SkillResult leave(double x);
  // Arm misuse (not Home, already holding, not holding) throws Error(kProtocol).
  SkillResult pick(const std::string& item);
  SkillResult place(const std::string& item);
  std::vector<MarkerObservation> sense();
  geom::Vec2 get_position(const std::string& name) const;

  // Name-based dispatch used by plan execution. Arguments follow the
  // catalog manifest; get_position succeeds with zero duration.
  SkillResult invoke(const std::string& name, const nlohmann::json& args);
  static bool has_binding(std::string_view name);

 private:
  SkillResult navigate_fallback(geom::Vec2 goal, const FallbackNavigator& nav);
  SkillResult navigate_policy(geom::Vec2 goal, const PolicyNavigator& nav);
  void set_arm(ArmState next);
  void record(SkillResult& result);
  void sync_held_item();

  geom::WorldMap& world_;
  RobotState& robot_;
  SkillConfig cfg_;
  Navigator navigator_;
  std::mt19937_64 rng_;
  TickObserver observer_;
  const std::atomic<bool>* cancel_ = nullptr;
  double clock_ = 0.0;
};

// Registry lookup with case, whitespace, hyphen and article normalization.
// Throws Error(kCatalog) naming the known entries.
std::string normalize_name(std::string_view name);
geom::Vec2 get_position(const geom::WorldMap& map, const std::string& name);

}  // namespace robotiq::skills

#endif  // ROBOTIQ_SKILLS_SKILLS_HPP_
