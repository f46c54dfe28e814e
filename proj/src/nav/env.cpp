#include "robotiq/nav/env.hpp"

#include <algorithm>
#include <cmath>

#include "robotiq/error.hpp"

namespace robotiq::nav {

using geom::kPi;
using nlohmann::json;

namespace {

constexpr double kDistanceFloor = 1e-6;
constexpr int kMaxSamplingAttempts = 10000;

[[noreturn]] void spec_error(const std::string& msg) {
  throw Error(ErrorKind::kInvalidSpec, "env config: " + msg);
}

}  // namespace

void EnvConfig::validate() const {
  if (!(delta_deg > 0.0)) spec_error("delta_deg must be > 0");
  const double expected = 180.0 / delta_deg + 1.0;
  if (std::abs(expected - n) > 1e-9) {
    spec_error("n must equal 180/delta + 1 (n=" + std::to_string(n) +
               ", delta=" + std::to_string(delta_deg) + ")");
  }
  if (!(r_min >= 0.0 && r_min < r_max)) spec_error("requires 0 <= r_min < r_max");
  if (!(q_bonus > 0.0)) spec_error("q_bonus must be > 0");
  if (!(v > 0.0)) spec_error("v must be > 0");
  if (!(dt > 0.0)) spec_error("dt must be > 0");
  if (!(goal_radius > 0.0)) spec_error("goal_radius must be > 0");
  if (max_steps < 1) spec_error("max_steps must be >= 1");
  if (!(robot_radius > 0.0)) spec_error("robot_radius must be > 0");
  if (d_max < 0.0) spec_error("d_max must be >= 0");
  if (const auto* d = std::get_if<DiscreteActions>(&actions)) {
    if (d->count < 3 || d->count % 2 == 0) spec_error("discrete action count must be odd and >= 3");
    if (!(d->omega_max > 0.0)) spec_error("omega_max must be > 0");
  } else {
    const auto& c = std::get<ContinuousActions>(actions);
    if (!(c.omega_min < c.omega_max)) spec_error("omega_min must be < omega_max");
  }
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  c.n = j.value("n", c.n);
  c.delta_deg = j.value("delta", j.value("delta_deg", c.delta_deg));
  c.r_min = j.value("r_min", c.r_min);
  c.r_max = j.value("r_max", c.r_max);
  c.d_max = j.value("d_max", c.d_max);
  c.v = j.value("v", c.v);
  c.dt = j.value("dt", c.dt);
  c.q_bonus = j.value("q_bonus", c.q_bonus);
  c.goal_radius = j.value("goal_radius", c.goal_radius);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.yaw_scale = j.value("yaw_scale", c.yaw_scale);
  c.robot_radius = j.value("robot_radius", c.robot_radius);
  c.start_jitter_xy = j.value("start_jitter_xy", c.start_jitter_xy);
  c.start_jitter_theta = j.value("start_jitter_theta", c.start_jitter_theta);
  c.min_goal_distance = j.value("min_goal_distance", c.min_goal_distance);
  c.max_return = j.value("max_return", c.max_return);
  c.goal_location = j.value("goal_location", c.goal_location);
  if (auto it = j.find("dg_mode"); it != j.end()) {
    const auto mode = it->get<std::string>();
    if (mode == "episode_start") {
      c.dg_mode = GoalDistanceMode::kEpisodeStart;
    } else if (mode == "d_max") {
      c.dg_mode = GoalDistanceMode::kMaxDistance;
    } else {
      spec_error("unknown dg_mode '" + mode + "'");
    }
  }
  if (auto it = j.find("actions"); it != j.end()) {
    const auto type = it->value("type", std::string("discrete"));
    if (type == "discrete") {
      c.actions = DiscreteActions{it->value("count", 5), it->value("omega_max", 1.5)};
    } else if (type == "continuous") {
      c.actions = ContinuousActions{it->value("omega_min", -1.5), it->value("omega_max", 1.5)};
    } else {
      spec_error("unknown action type '" + type + "'");
    }
  }
  if (auto it = j.find("fixed_start"); it != j.end() && !it->is_null()) {
    c.fixed_start = Pose2D{(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()};
  }
  if (auto it = j.find("fixed_goal"); it != j.end() && !it->is_null()) {
    c.fixed_goal = Vec2{(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  c.validate();
  return c;
}

json env_config_to_json(const EnvConfig& c) {
  json j = {{"n", c.n},
            {"delta", c.delta_deg},
            {"r_min", c.r_min},
            {"r_max", c.r_max},
            {"d_max", c.d_max},
            {"v", c.v},
            {"dt", c.dt},
            {"q_bonus", c.q_bonus},
            {"goal_radius", c.goal_radius},
            {"max_steps", c.max_steps},
            {"yaw_scale", c.yaw_scale},
            {"robot_radius", c.robot_radius},
            {"start_jitter_xy", c.start_jitter_xy},
            {"start_jitter_theta", c.start_jitter_theta},
            {"min_goal_distance", c.min_goal_distance},
            {"max_return", c.max_return},
            {"goal_location", c.goal_location},
            {"dg_mode", c.dg_mode == GoalDistanceMode::kEpisodeStart ? "episode_start" : "d_max"}};
  if (const auto* d = std::get_if<DiscreteActions>(&c.actions)) {
    j["actions"] = {{"type", "discrete"}, {"count", d->count}, {"omega_max", d->omega_max}};
  } else {
    const auto& a = std::get<ContinuousActions>(c.actions);
    j["actions"] = {{"type", "continuous"}, {"omega_min", a.omega_min}, {"omega_max", a.omega_max}};
  }
  if (c.fixed_start) j["fixed_start"] = {c.fixed_start->x, c.fixed_start->y, c.fixed_start->theta};
  if (c.fixed_goal) j["fixed_goal"] = {c.fixed_goal->x, c.fixed_goal->y};
  return j;
}

std::vector<double> Observation::flat() const {
  std::vector<double> out(ranges);
  out.push_back(heading_error);
  out.push_back(goal_distance);
  return out;
}

std::string_view to_string(Event e) {
  switch (e) {
    case Event::kNone: return "none";
    case Event::kGoal: return "goal";
    case Event::kCollision: return "collision";
    case Event::kTimeout: return "timeout";
  }
  return "none";
}

double goal_bearing(const Pose2D& robot, Vec2 goal) {
  const double dx = goal.x - robot.x;
  const double dy = goal.y - robot.y;
  if (dx == 0.0 && dy == 0.0) {
    throw Error(ErrorKind::kInvalidInput, "goal_bearing: goal coincides with robot position");
  }
  return std::atan2(dy, dx);
}

double heading_error(double theta_goal, double heading) {
  return geom::wrap_angle(theta_goal - heading);
}

std::vector<double> discrete_actions(int count, double omega_max) {
  if (count < 3 || count % 2 == 0) {
    throw Error(ErrorKind::kInvalidSpec, "discrete action count must be odd and >= 3");
  }
  if (!(omega_max > 0.0)) throw Error(ErrorKind::kInvalidSpec, "omega_max must be > 0");
  const int half = (count - 1) / 2;
  const double step = omega_max / half;
  std::vector<double> out(count);
  for (int a = 0; a < count; ++a) {
    // The end points are exactly +/- omega_max and the table is antisymmetric.
    const int k = half - a;
    out[a] = k == half ? omega_max : k == -half ? -omega_max : k * step;
  }
  return out;
}

double shaped_reward(double phi, double goal_distance_ref, double current_distance,
                     const EnvConfig& cfg) {
  const double d_c = std::max(current_distance, kDistanceFloor);
  const double r_yaw = 1.0 - std::min(std::abs(phi), kPi) / kPi;
  return cfg.yaw_scale * r_yaw * std::exp2(goal_distance_ref / d_c);
}

double step_reward(Event event, double shaped, const EnvConfig& cfg) {
  switch (event) {
    case Event::kCollision: return -cfg.q_bonus;
    case Event::kGoal: return cfg.q_bonus;
    default: return shaped;
  }
}

double ideal_return(const EnvConfig& cfg, double start_distance) {
  const double ref = cfg.dg_mode == GoalDistanceMode::kMaxDistance && cfg.d_max > 0.0
                         ? cfg.d_max
                         : start_distance;
  const double stride = cfg.v * cfg.dt;
  double total = 0.0;
  for (int k = 1; k <= cfg.max_steps; ++k) {
    const double d = start_distance - k * stride;
    if (d <= cfg.goal_radius) return total + cfg.q_bonus;
    total += shaped_reward(0.0, ref, d, cfg);
  }
  return total;
}

double normalize_score(double episode_return, double q_bonus, double max_return) {
  const double span = max_return + q_bonus;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((episode_return + q_bonus) / span, 0.0, 1.0);
}

double normalize_score(double episode_return, const EnvConfig& cfg) {
  double max_return = cfg.max_return;
  if (!(max_return > 0.0)) {
    if (!(cfg.d_max > 0.0)) {
      throw Error(ErrorKind::kInvalidSpec, "normalize_score needs max_return or d_max");
    }
    max_return = ideal_return(cfg, cfg.d_max);
  }
  return normalize_score(episode_return, cfg.q_bonus, max_return);
}

Observation observe(const geom::WorldMap& map, const Pose2D& pose, const EpisodeContext& ctx,
                    const EnvConfig& cfg) {
  Observation obs;
  obs.ranges.resize(static_cast<size_t>(cfg.n));
  const double step = cfg.n > 1 ? kPi / (cfg.n - 1) : 0.0;
  for (int j = 0; j < cfg.n; ++j) {
    const double angle = pose.theta - kPi / 2.0 + j * step;
    obs.ranges[static_cast<size_t>(j)] = geom::ray_cast(map, pose, angle, cfg.r_min, cfg.r_max);
  }
  const double d_max = cfg.d_max > 0.0 ? cfg.d_max : map.diagonal();
  const double d_c = geom::distance(pose.position(), ctx.goal);
  obs.heading_error = d_c > 0.0 ? heading_error(goal_bearing(pose, ctx.goal), pose.theta) : 0.0;
  obs.goal_distance = std::min(d_c, d_max);
  return obs;
}

NavEnv::NavEnv(geom::WorldMap map, EnvConfig cfg) : map_(std::move(map)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!(cfg_.d_max > 0.0)) cfg_.d_max = map_.diagonal();
  if (const auto* d = std::get_if<DiscreteActions>(&cfg_.actions)) {
    action_table_ = discrete_actions(d->count, d->omega_max);
  }
  if (!cfg_.goal_location.empty() && !map_.locations.contains(cfg_.goal_location)) {
    throw Error(ErrorKind::kSetup, "env goal_location '" + cfg_.goal_location + "' not in map");
  }
}

Observation NavEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& b = map_.bounds;
  const double margin = cfg_.robot_radius;
  const auto uniform_point = [&] {
    return Vec2{b.min.x + margin + unit(rng) * (b.max.x - b.min.x - 2 * margin),
                b.min.y + margin + unit(rng) * (b.max.y - b.min.y - 2 * margin)};
  };

  std::optional<Vec2> goal_fixed = cfg_.fixed_goal;
  if (!goal_fixed && !cfg_.goal_location.empty()) goal_fixed = map_.locations.at(cfg_.goal_location);

  for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    Pose2D start;
    if (cfg_.fixed_start) {
      start = *cfg_.fixed_start;
      start.x += cfg_.start_jitter_xy * (2.0 * unit(rng) - 1.0);
      start.y += cfg_.start_jitter_xy * (2.0 * unit(rng) - 1.0);
      start.theta = geom::wrap_angle(start.theta + cfg_.start_jitter_theta * (2.0 * unit(rng) - 1.0));
    } else {
      const Vec2 p = uniform_point();
      start = {p.x, p.y, geom::wrap_angle(kPi * (2.0 * unit(rng) - 1.0))};
    }
    if (geom::collision_check(map_, start, cfg_.robot_radius)) continue;

    const Vec2 goal = goal_fixed ? *goal_fixed : uniform_point();
    if (!goal_fixed && geom::collision_check(map_, {goal.x, goal.y, 0.0}, cfg_.robot_radius)) continue;
    const double d = geom::distance(start.position(), goal);
    if (d <= cfg_.goal_radius || d > cfg_.d_max) continue;
    if (!(cfg_.fixed_start && goal_fixed) && d < cfg_.min_goal_distance) continue;
    return begin_episode(start, goal);
  }
  throw Error(ErrorKind::kSetup, "reset: no collision-free start/goal after 10000 attempts");
}

Observation NavEnv::reset_to(const Pose2D& start, Vec2 goal) {
  const double d = geom::distance(start.position(), goal);
  if (!(d > 0.0) || d > cfg_.d_max) {
    throw Error(ErrorKind::kSetup, "reset_to: start-goal distance must be in (0, d_max]");
  }
  return begin_episode(start, goal);
}

Observation NavEnv::begin_episode(const Pose2D& start, Vec2 goal) {
  pose_ = start;
  ctx_ = EpisodeContext{goal, start, geom::distance(start.position(), goal), 0};
  done_ = false;
  return_ = 0.0;
  transcript_.clear();
  return observe(map_, pose_, ctx_, cfg_);
}

double NavEnv::omega_for(const Action& action) const {
  if (const auto* d = std::get_if<DiscreteActions>(&cfg_.actions)) {
    if (const auto* idx = std::get_if<int>(&action)) {
      if (*idx < 0 || *idx >= d->count) {
        throw Error(ErrorKind::kInvalidInput, "discrete action index out of range");
      }
      return action_table_[static_cast<size_t>(*idx)];
    }
    return std::clamp(std::get<double>(action), -d->omega_max, d->omega_max);
  }
  const auto& c = std::get<ContinuousActions>(cfg_.actions);
  if (const auto* idx = std::get_if<int>(&action)) {
    throw Error(ErrorKind::kInvalidInput, "continuous env needs an angular rate, got index " +
                                              std::to_string(*idx));
  }
  return std::clamp(std::get<double>(action), c.omega_min, c.omega_max);
}

double NavEnv::dg_for_reward() const {
  return cfg_.dg_mode == GoalDistanceMode::kMaxDistance ? cfg_.d_max : ctx_.start_distance;
}

StepResult NavEnv::step(const Action& action) {
  if (done_) throw Error(ErrorKind::kProtocol, "step called on a finished episode; call reset");
  const double omega = omega_for(action);
  pose_ = geom::integrate_unicycle(pose_, cfg_.v, omega, cfg_.dt);
  ++ctx_.step_count;

  StepResult out;
  out.observation = observe(map_, pose_, ctx_, cfg_);
  const double d_c = geom::distance(pose_.position(), ctx_.goal);
  if (geom::collision_check(map_, pose_, cfg_.robot_radius)) {
    out.event = Event::kCollision;
  } else if (d_c <= cfg_.goal_radius) {
    out.event = Event::kGoal;
  } else if (ctx_.step_count >= cfg_.max_steps) {
    out.event = Event::kTimeout;
  }
  const double shaped = shaped_reward(out.observation.heading_error, dg_for_reward(), d_c, cfg_);
  out.reward = step_reward(out.event, shaped, cfg_);
  out.done = out.event != Event::kNone;
  done_ = out.done;
  return_ += out.reward;
  if (recording_) transcript_.push_back({out.observation.flat(), omega, out.reward, out.event});
  return out;
}

double NavEnv::shaped_value() const {
  const double raw = geom::distance(pose_.position(), ctx_.goal);
  const double phi = raw > 0.0 ? heading_error(goal_bearing(pose_, ctx_.goal), pose_.theta) : 0.0;
  return shaped_reward(phi, dg_for_reward(), std::max(raw, cfg_.goal_radius), cfg_);
}

double NavEnv::episode_ideal_return() const {
  return cfg_.max_return > 0.0 ? cfg_.max_return : ideal_return(cfg_, ctx_.start_distance);
}

double NavEnv::episode_score() const {
  return normalize_score(return_, cfg_.q_bonus, episode_ideal_return());
}

std::string NavEnv::transcript_jsonl() const {
  std::string out;
  for (const auto& r : transcript_) {
    out += json{{"obs", r.observation},
                {"action", r.action},
                {"reward", r.reward},
                {"event", std::string(to_string(r.event))}}
               .dump();
    out += '\n';
  }
  return out;
}

}  // namespace robotiq::nav
