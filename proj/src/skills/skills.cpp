#include "robotiq/skills/skills.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "robotiq/error.hpp"
#include "robotiq/nav/env.hpp"

namespace robotiq::skills {

using geom::Pose2D;
using geom::Vec2;
using nlohmann::json;

std::string_view to_string(ArmState s) {
  switch (s) {
    case ArmState::kHome: return "home";
    case ArmState::kPrePick: return "pre_pick";
    case ArmState::kPick: return "pick";
    case ArmState::kPostPick: return "post_pick";
    case ArmState::kPrePlace: return "pre_place";
    case ArmState::kPlace: return "place";
    case ArmState::kPostPlace: return "post_place";
  }
  return "unknown";
}

bool arm_transition_allowed(ArmState from, ArmState to) {
  switch (from) {
    case ArmState::kHome: return to == ArmState::kPrePick;
    case ArmState::kPrePick: return to == ArmState::kPick;
    case ArmState::kPick: return to == ArmState::kPostPick;
    case ArmState::kPostPick: return to == ArmState::kPrePlace;
    case ArmState::kPrePlace: return to == ArmState::kPlace;
    case ArmState::kPlace: return to == ArmState::kPostPlace;
    case ArmState::kPostPlace: return to == ArmState::kHome;
  }
  return false;
}

std::string_view to_string(SkillStatus s) {
  switch (s) {
    case SkillStatus::kSuccess: return "success";
    case SkillStatus::kFailure: return "failure";
    case SkillStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

std::string trace_jsonl(const SkillResult& result) {
  std::string out;
  for (const auto& s : result.trace) {
    out += json{{"t", s.t},
                {"pose", {s.pose.x, s.pose.y, s.pose.theta}},
                {"arm", std::string(to_string(s.arm))},
                {"gripper", s.gripper_opening},
                {"held", s.held_item}}
               .dump();
    out += '\n';
  }
  return out;
}

SkillConfig skill_config_from_json(const json& j) {
  SkillConfig c;
  c.robot_radius = j.value("robot_radius", c.robot_radius);
  c.v_max = j.value("v_max", c.v_max);
  c.omega_max = j.value("omega_max", c.omega_max);
  c.control_dt = j.value("control_dt", c.control_dt);
  c.goal_radius = j.value("goal_radius", c.goal_radius);
  c.time_limit = j.value("time_limit", c.time_limit);
  c.reach_radius = j.value("reach_radius", c.reach_radius);
  c.arm_phase_duration = j.value("arm_phase_duration", c.arm_phase_duration);
  c.noise.sigma_range = j.value("sigma_range", c.noise.sigma_range);
  c.noise.sigma_bearing = j.value("sigma_bearing", c.noise.sigma_bearing);
  if (!(c.control_dt > 0.0) || !(c.time_limit > 0.0) || !(c.v_max > 0.0) || !(c.goal_radius > 0.0)) {
    throw Error(ErrorKind::kInvalidSpec, "skill config: control_dt, time_limit, v_max and goal_radius must be > 0");
  }
  return c;
}

std::string normalize_name(std::string_view name) {
  std::string s;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '-' || ch == '_') {
      if (!s.empty() && s.back() != '_') s += '_';
    } else {
      s += static_cast<char>(std::tolower(c));
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  for (std::string_view article : {"the_", "a_", "an_"}) {
    if (s.size() > article.size() && s.compare(0, article.size(), article) == 0) {
      s.erase(0, article.size());
      break;
    }
  }
  return s;
}

Vec2 get_position(const geom::WorldMap& map, const std::string& name) {
  const std::string key = normalize_name(name);
  for (const auto& [loc, p] : map.locations) {
    if (normalize_name(loc) == key) return p;
  }
  std::string known;
  for (const auto& [loc, p] : map.locations) known += (known.empty() ? "" : ", ") + loc;
  throw Error(ErrorKind::kCatalog, "unknown location '" + name + "'; known: " + known);
}

SkillRunner::SkillRunner(geom::WorldMap& world, RobotState& robot, SkillConfig cfg,
                         Navigator navigator, std::uint64_t seed)
    : world_(world), robot_(robot), cfg_(cfg), navigator_(std::move(navigator)), rng_(seed) {
  if (const auto* p = std::get_if<PolicyNavigator>(&navigator_); p && !p->checkpoint) {
    throw Error(ErrorKind::kInvalidSpec, "policy navigator without a checkpoint");
  }
}

namespace {

// Book-keeping shared by every skill call: clock, trace, limit, cancel.
class Run {
 public:
  Run(double& clock, double limit, const std::atomic<bool>* cancel)
      : clock_(clock), start_(clock), limit_(limit), cancel_(cancel) {}

  double elapsed() const { return elapsed_; }
  bool cancelled() const { return cancel_ != nullptr && cancel_->load(); }
  bool out_of_time() const { return elapsed_ >= limit_; }

  void advance(double dt) {
    if (dt != dt_) {
      base_ = elapsed_;
      dt_ = dt;
      ticks_ = 0;
    }
    ++ticks_;
    elapsed_ = base_ + static_cast<double>(ticks_) * dt;
    clock_ = start_ + elapsed_;
  }

  SkillResult finish(SkillStatus status, std::string reason = {}) {
    result_.status = status;
    result_.duration = elapsed_;
    result_.reason = std::move(reason);
    return std::move(result_);
  }

  SkillResult& result() { return result_; }

 private:
  double& clock_;
  double start_;
  double limit_;
  const std::atomic<bool>* cancel_;
  double elapsed_ = 0.0;
  double dt_ = 0.0;
  double base_ = 0.0;
  long ticks_ = 0;
  SkillResult result_;
};

double clamp_abs(double x, double limit) { return std::clamp(x, -limit, limit); }

}  // namespace

void SkillRunner::sync_held_item() {
  if (!robot_.held_item) return;
  if (auto* item = world_.find_item(*robot_.held_item)) item->pose = robot_.pose;
}

void SkillRunner::set_arm(ArmState next) {
  if (!arm_transition_allowed(robot_.arm, next)) {
    throw Error(ErrorKind::kProtocol, "arm cannot move from " + std::string(to_string(robot_.arm)) +
                                          " to " + std::string(to_string(next)));
  }
  robot_.arm = next;
}

void SkillRunner::record(SkillResult& result) {
  sync_held_item();
  result.trace.push_back(
      {clock_, robot_.pose, robot_.arm, robot_.gripper.opening, robot_.held_item.value_or("")});
  if (observer_) observer_(clock_, robot_);
}

namespace {

// Moves the robot one control period unless translating would touch an
// obstacle; then it only rotates. Returns false when translation was refused.
bool shielded_step(const geom::WorldMap& world, Pose2D& pose, double v, double omega, double dt,
                   double radius) {
  const Pose2D next = geom::integrate_unicycle(pose, v, omega, dt);
  if (!geom::collision_check(world, next, radius)) {
    pose = next;
    return true;
  }
  const Pose2D turn = geom::integrate_unicycle(pose, 0.0, omega, dt);
  if (!geom::collision_check(world, turn, radius)) pose = turn;
  return v == 0.0;
}

}  // namespace

SkillResult SkillRunner::go_to(const std::string& location) {
  return go_to_point(skills::get_position(world_, location));
}

SkillResult SkillRunner::go_to_point(Vec2 goal) {
  if (const auto* p = std::get_if<PolicyNavigator>(&navigator_)) return navigate_policy(goal, *p);
  return navigate_fallback(goal, std::get<FallbackNavigator>(navigator_));
}

SkillResult SkillRunner::navigate_fallback(Vec2 goal, const FallbackNavigator& nav) {
  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  for (;;) {
    const double d = geom::distance(robot_.pose.position(), goal);
    if (d <= cfg_.goal_radius) return run.finish(SkillStatus::kSuccess);
    if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
    if (run.out_of_time()) return run.finish(SkillStatus::kTimeout, "navigation timed out");
    const double phi = nav::heading_error(nav::goal_bearing(robot_.pose, goal), robot_.pose.theta);
    const double omega = clamp_abs(nav.k_heading * phi, cfg_.omega_max);
    const double v = std::min(cfg_.v_max, nav.k_distance * d) * std::max(std::cos(phi), 0.0);
    shielded_step(world_, robot_.pose, v, omega, cfg_.control_dt, cfg_.robot_radius);
    run.advance(cfg_.control_dt);
    record(run.result());
  }
}

SkillResult SkillRunner::navigate_policy(Vec2 goal, const PolicyNavigator& nav) {
  const rl::Checkpoint& ckpt = *nav.checkpoint;
  nav::EnvConfig ec = ckpt.env;
  if (!(ec.d_max > 0.0)) ec.d_max = world_.diagonal();
  std::vector<double> table;
  if (const auto* d = std::get_if<nav::DiscreteActions>(&ec.actions)) {
    table = nav::discrete_actions(d->count, d->omega_max);
  }
  nav::EpisodeContext ctx;
  ctx.goal = goal;
  ctx.start_pose = robot_.pose;
  ctx.start_distance = geom::distance(robot_.pose.position(), goal);

  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  for (;;) {
    if (geom::distance(robot_.pose.position(), goal) <= ec.goal_radius) {
      return run.finish(SkillStatus::kSuccess);
    }
    if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
    if (run.out_of_time()) return run.finish(SkillStatus::kTimeout, "navigation timed out");
    const nav::Observation obs = nav::observe(world_, robot_.pose, ctx, ec);
    const nav::Action a = ckpt.policy.act_deterministic(obs.flat());
    const double omega = std::holds_alternative<int>(a)
                             ? table.at(static_cast<size_t>(std::get<int>(a)))
                             : std::get<double>(a);
    const Pose2D next = geom::integrate_unicycle(robot_.pose, ec.v, omega, ec.dt);
    if (geom::collision_check(world_, next, cfg_.robot_radius)) {
      return run.finish(SkillStatus::kFailure, "policy step would collide");
    }
    robot_.pose = next;
    run.advance(ec.dt);
    record(run.result());
  }
}

std::vector<MarkerObservation> SkillRunner::sense() {
  return sense_marker(world_, robot_.pose, cfg_.camera, cfg_.noise, rng_);
}

Vec2 SkillRunner::get_position(const std::string& name) const {
  return skills::get_position(world_, name);
}

SkillResult SkillRunner::approach(int marker_id, double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::kInvalidInput, "approach: x must be > 0");
  if (world_.find_marker(marker_id) == nullptr) {
    throw Error(ErrorKind::kCatalog, "unknown marker id " + std::to_string(marker_id));
  }
  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  double lost = 0.0;
  const int window = std::max(1, cfg_.approach_window);
  for (;;) {
    if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
    // Several camera frames per control period; their mean drives the stop test.
    double range = 0.0;
    double bearing = 0.0;
    int seen = 0;
    for (int k = 0; k < window; ++k) {
      for (const auto& o : sense()) {
        if (o.id != marker_id) continue;
        range += o.range;
        bearing += o.bearing;
        ++seen;
      }
    }
    double v = 0.0;
    double omega = 0.0;
    if (seen > 0) {
      lost = 0.0;
      range /= seen;
      bearing /= seen;
      if (seen == window && std::abs(range - x) <= 0.75 * cfg_.approach_range_tol &&
          std::abs(bearing) <= 0.75 * cfg_.approach_bearing_tol) {
        return run.finish(SkillStatus::kSuccess);
      }
      v = clamp_abs(cfg_.k_range * (range - x), cfg_.v_max);
      omega = clamp_abs(cfg_.k_bearing * bearing, cfg_.omega_max);
    } else {
      if (lost >= cfg_.lost_budget) {
        return run.finish(SkillStatus::kFailure, "marker " + std::to_string(marker_id) + " lost");
      }
      lost += cfg_.control_dt;
    }
    if (run.out_of_time()) return run.finish(SkillStatus::kTimeout, "approach timed out");
    shielded_step(world_, robot_.pose, v, omega, cfg_.control_dt, cfg_.robot_radius);
    run.advance(cfg_.control_dt);
    record(run.result());
  }
}

SkillResult SkillRunner::leave(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::kInvalidInput, "leave: x must be > 0");
  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  const Vec2 origin = robot_.pose.position();
  const double target = geom::wrap_angle(robot_.pose.theta + geom::kPi);
  const double v = cfg_.v_max;
  const double w = cfg_.omega_max;
  const double dt = cfg_.control_dt;

  // Turn toward the side whose reversing arc stays clear.
  double side = 1.0;
  for (double s : {1.0, -1.0}) {
    Pose2D p = robot_.pose;
    bool clear = true;
    for (double turned = 0.0; turned < geom::kPi; turned += w * dt) {
      p = geom::integrate_unicycle(p, v, s * w, dt);
      if (geom::collision_check(world_, p, cfg_.robot_radius)) {
        clear = false;
        break;
      }
    }
    if (clear) {
      side = s;
      break;
    }
  }

  bool turning = true;
  for (;;) {
    if (geom::distance(robot_.pose.position(), origin) >= x) return run.finish(SkillStatus::kSuccess);
    if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
    if (run.out_of_time()) return run.finish(SkillStatus::kTimeout, "leave timed out");
    const double err = geom::wrap_angle(target - robot_.pose.theta);
    double omega = 0.0;
    if (turning) {
      const double remaining = side > 0.0 ? (err < 0.0 ? err + 2.0 * geom::kPi : err)
                                          : (err > 0.0 ? err - 2.0 * geom::kPi : err);
      omega = side * std::min(w, std::abs(remaining) / dt);
      if (std::abs(err) < 1e-9) turning = false;
    } else {
      omega = clamp_abs(2.0 * err, w);
    }
    const Pose2D next = geom::integrate_unicycle(robot_.pose, v, omega, dt);
    if (geom::collision_check(world_, next, cfg_.robot_radius)) {
      return run.finish(SkillStatus::kFailure, "leave path blocked");
    }
    robot_.pose = next;
    if (turning && std::abs(geom::wrap_angle(target - robot_.pose.theta)) < 1e-9) turning = false;
    run.advance(dt);
    record(run.result());
  }
}

namespace {

double opening_at(const GripperProfile& p, double t) {
  if (p.samples.empty()) return 0.0;
  if (t >= p.duration()) return p.samples.back().position;
  const auto it = std::upper_bound(p.samples.begin(), p.samples.end(), t,
                                   [](double v, const GripperSample& s) { return v < s.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  return a.position + u * (b.position - a.position);
}

}  // namespace

SkillResult SkillRunner::pick(const std::string& item_name) {
  if (robot_.held_item) {
    throw Error(ErrorKind::kProtocol, "pick: already holding '" + *robot_.held_item + "'");
  }
  if (robot_.arm != ArmState::kHome) {
    throw Error(ErrorKind::kProtocol, "pick: arm is " + std::string(to_string(robot_.arm)) + ", not home");
  }
  geom::Item* item = nullptr;
  for (auto& it : world_.items) {
    if (normalize_name(it.name) == normalize_name(item_name)) item = &it;
  }
  if (item == nullptr) throw Error(ErrorKind::kCatalog, "unknown item '" + item_name + "'");

  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  const Vec2 rel = item->pose.position() - robot_.pose.position();
  const double d = geom::norm(rel);
  const double bearing = d > 0.0 ? geom::wrap_angle(std::atan2(rel.y, rel.x) - robot_.pose.theta) : 0.0;
  if (d > cfg_.reach_radius || std::abs(bearing) > cfg_.reach_bearing) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "out of reach (%.3f m, %.1f deg)", d, bearing * 180.0 / geom::kPi);
    return run.finish(SkillStatus::kFailure, buf);
  }

  const auto open = gripper_trajectory(GripperDirection::kOpen, cfg_.max_opening, cfg_.gripper_a_peak,
                                       robot_.gripper.opening);
  const auto close = gripper_trajectory(GripperDirection::kClose, cfg_.max_opening,
                                        cfg_.gripper_a_peak, cfg_.max_opening);
  const std::string name = item->name;
  for (ArmState phase : {ArmState::kPrePick, ArmState::kPick, ArmState::kPostPick}) {
    set_arm(phase);
    const int steps = static_cast<int>(std::ceil(cfg_.arm_phase_duration / cfg_.control_dt - 1e-9));
    for (int k = 1; k <= steps; ++k) {
      if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
      const double t = k * cfg_.control_dt;
      const double before = robot_.gripper.opening;
      if (phase == ArmState::kPick) {
        robot_.gripper.opening = t <= open.duration() ? opening_at(open, t)
                                                      : opening_at(close, t - open.duration());
        robot_.gripper.opening = std::clamp(robot_.gripper.opening, 0.0, cfg_.max_opening);
      }
      robot_.gripper.velocity = (robot_.gripper.opening - before) / cfg_.control_dt;
      run.advance(cfg_.control_dt);
      record(run.result());
    }
    if (phase == ArmState::kPick) {
      robot_.held_item = name;
      world_.find_item(name)->held = true;
      sync_held_item();
    }
  }
  return run.finish(SkillStatus::kSuccess);
}

SkillResult SkillRunner::place(const std::string& item_name) {
  if (!robot_.held_item || normalize_name(*robot_.held_item) != normalize_name(item_name)) {
    throw Error(ErrorKind::kProtocol, "place: not holding '" + item_name + "'");
  }
  if (robot_.arm != ArmState::kPostPick) {
    throw Error(ErrorKind::kProtocol, "place: arm is " + std::string(to_string(robot_.arm)));
  }
  Run run(clock_, cfg_.time_limit, cancel_);
  record(run.result());
  const Vec2 spot = robot_.pose.position() +
                    cfg_.place_offset * Vec2{std::cos(robot_.pose.theta), std::sin(robot_.pose.theta)};
  if (!world_.bounds.contains(spot) || geom::point_in_obstacle(world_, spot)) {
    return run.finish(SkillStatus::kFailure, "place point is not free");
  }
  const auto open = gripper_trajectory(GripperDirection::kOpen, cfg_.max_opening, cfg_.gripper_a_peak,
                                       robot_.gripper.opening);
  const auto close = gripper_trajectory(GripperDirection::kClose, cfg_.max_opening,
                                        cfg_.gripper_a_peak, cfg_.max_opening);
  const std::string name = *robot_.held_item;
  for (ArmState phase : {ArmState::kPrePlace, ArmState::kPlace, ArmState::kPostPlace}) {
    set_arm(phase);
    const int steps = static_cast<int>(std::ceil(cfg_.arm_phase_duration / cfg_.control_dt - 1e-9));
    for (int k = 1; k <= steps; ++k) {
      if (run.cancelled()) return run.finish(SkillStatus::kFailure, "cancelled");
      const double t = k * cfg_.control_dt;
      const double before = robot_.gripper.opening;
      if (phase == ArmState::kPlace) robot_.gripper.opening = opening_at(open, t);
      // Fingers close again once the arm has retreated from the object.
      if (phase == ArmState::kPostPlace) robot_.gripper.opening = opening_at(close, t);
      robot_.gripper.opening = std::clamp(robot_.gripper.opening, 0.0, cfg_.max_opening);
      robot_.gripper.velocity = (robot_.gripper.opening - before) / cfg_.control_dt;
      run.advance(cfg_.control_dt);
      record(run.result());
    }
    if (phase == ArmState::kPlace) {
      geom::Item* item = world_.find_item(name);
      robot_.held_item.reset();
      item->held = false;
      item->pose = {spot.x, spot.y, robot_.pose.theta};
    }
  }
  set_arm(ArmState::kHome);
  record(run.result());
  return run.finish(SkillStatus::kSuccess);
}

namespace {

const json& arg(const json& args, const char* key, const std::string& fn) {
  auto it = args.find(key);
  if (it == args.end()) throw Error(ErrorKind::kInvalidInput, fn + ": missing argument '" + key + "'");
  return *it;
}

constexpr std::array<std::string_view, 6> kBindings = {"go_to", "approach", "leave",
                                                       "pick",  "place",    "get_position"};

}  // namespace

bool SkillRunner::has_binding(std::string_view name) {
  return std::find(kBindings.begin(), kBindings.end(), name) != kBindings.end();
}

SkillResult SkillRunner::invoke(const std::string& name, const json& args) {
  if (name == "go_to") return go_to(arg(args, "location", name).get<std::string>());
  if (name == "approach") {
    return approach(arg(args, "marker_id", name).get<int>(), arg(args, "x", name).get<double>());
  }
  if (name == "leave") return leave(arg(args, "x", name).get<double>());
  if (name == "pick") return pick(arg(args, "item", name).get<std::string>());
  if (name == "place") return place(arg(args, "item", name).get<std::string>());
  if (name == "get_position") {
    get_position(arg(args, "name", name).get<std::string>());
    SkillResult r;
    record(r);
    return r;
  }
  throw Error(ErrorKind::kCatalog, "no skill bound to '" + name + "'");
}

}  // namespace robotiq::skills
