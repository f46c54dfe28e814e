#ifndef ROBOTIQ_NAV_ENV_HPP_
#define ROBOTIQ_NAV_ENV_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "robotiq/geom/world.hpp"

namespace robotiq::nav {

using geom::Pose2D;
using geom::Vec2;

struct DiscreteActions {
  int count = 5;  // odd, >= 3
  double omega_max = 1.5;
};

struct ContinuousActions {
  double omega_min = -1.5;
  double omega_max = 1.5;
};

using ActionSpec = std::variant<DiscreteActions, ContinuousActions>;

// Either an index into the discrete action table or an angular rate.
using Action = std::variant<int, double>;

// What D_g means inside the shaped reward.
enum class GoalDistanceMode { kEpisodeStart, kMaxDistance };

struct EnvConfig {
  int n = 25;                // lidar rays
  double delta_deg = 7.5;    // angular resolution
  double r_min = 0.120;
  double r_max = 3.5;
  double d_max = 0.0;        // 0: use the map diagonal
  double v = 0.25;           // constant forward speed
  double dt = 0.2;           // control period
  double q_bonus = 200.0;
  double goal_radius = 0.2;
  int max_steps = 200;
  double yaw_scale = 5.0;
  double robot_radius = 0.22;
  ActionSpec actions = DiscreteActions{};
  GoalDistanceMode dg_mode = GoalDistanceMode::kEpisodeStart;

  // Episode sampling. Unset start/goal are drawn uniformly from free space.
  std::optional<Pose2D> fixed_start;
  std::optional<Vec2> fixed_goal;
  std::string goal_location;  // resolved against the map's locations
  double start_jitter_xy = 0.0;
  double start_jitter_theta = 0.0;
  double min_goal_distance = 0.5;
  double max_return = 0.0;  // 0: derived from an ideal straight-line episode

  // Throws Error(kInvalidSpec) when an invariant does not hold.
  void validate() const;
};

EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& cfg);

struct Observation {
  std::vector<double> ranges;
  double heading_error = 0.0;
  double goal_distance = 0.0;

  // Ranges followed by heading error and goal distance (width n + 2).
  std::vector<double> flat() const;
};

enum class Event { kNone, kGoal, kCollision, kTimeout };
std::string_view to_string(Event e);

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  Event event = Event::kNone;
};

struct EpisodeContext {
  Vec2 goal;
  Pose2D start_pose;
  double start_distance = 0.0;  // D_g, fixed at reset
  int step_count = 0;
};

// Bearing from the robot to the goal; throws kInvalidInput when they coincide.
double goal_bearing(const Pose2D& robot, Vec2 goal);

// wrap(theta_goal - heading) into [-pi, pi]; positive means turn counterclockwise.
double heading_error(double theta_goal, double heading);

// Angular rates for a discrete action table: entry a is ((N-1)/2 - a) * step,
// step = omega_max / ((N-1)/2). Throws kInvalidSpec for even or N < 3.
std::vector<double> discrete_actions(int count, double omega_max);

// yaw_scale * (1 - |phi|/pi) * 2^(D_g / D_c), with D_c floored at 1e-6.
double shaped_reward(double phi, double goal_distance_ref, double current_distance,
                     const EnvConfig& cfg);

double step_reward(Event event, double shaped, const EnvConfig& cfg);

// Return of an ideal episode: straight at the goal from `start_distance`
// with zero heading error, ending in the goal bonus.
double ideal_return(const EnvConfig& cfg, double start_distance);

// Affine map with -q_bonus -> 0 and max_return -> 1, clamped to [0, 1].
double normalize_score(double episode_return, double q_bonus, double max_return);
double normalize_score(double episode_return, const EnvConfig& cfg);

// Observation at `pose`: n rays over [theta - pi/2, theta + pi/2].
Observation observe(const geom::WorldMap& map, const Pose2D& pose, const EpisodeContext& ctx,
                    const EnvConfig& cfg);

struct TranscriptRecord {
  std::vector<double> observation;
  double action = 0.0;  // applied angular rate
  double reward = 0.0;
  Event event = Event::kNone;
};

class NavEnv {
 public:
  NavEnv(geom::WorldMap map, EnvConfig cfg);

  Observation reset(std::uint64_t seed);
  Observation reset_to(const Pose2D& start, Vec2 goal);
  StepResult step(const Action& action);

  // Angular rate an action maps to under this env's action spec.
  double omega_for(const Action& action) const;

  const EnvConfig& config() const { return cfg_; }
  const geom::WorldMap& map() const { return map_; }
  const EpisodeContext& context() const { return ctx_; }
  const Pose2D& pose() const { return pose_; }
  bool done() const { return done_; }
  double episode_return() const { return return_; }

  // Shaped reward at the current pose with D_c floored at goal_radius.
  double shaped_value() const;
  double episode_ideal_return() const;
  double episode_score() const;

  void set_recording(bool on) { recording_ = on; }
  const std::vector<TranscriptRecord>& transcript() const { return transcript_; }
  std::string transcript_jsonl() const;

 private:
  Observation begin_episode(const Pose2D& start, Vec2 goal);
  double dg_for_reward() const;

  geom::WorldMap map_;
  EnvConfig cfg_;
  std::vector<double> action_table_;
  EpisodeContext ctx_;
  Pose2D pose_;
  bool done_ = true;
  double return_ = 0.0;
  bool recording_ = false;
  std::vector<TranscriptRecord> transcript_;
};

}  // namespace robotiq::nav

#endif  // ROBOTIQ_NAV_ENV_HPP_
