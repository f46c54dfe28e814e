#include "robotiq/service/session.hpp"

#include <cmath>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"

namespace robotiq::service {

using nlohmann::json;

json Event::to_json() const { return {{"seq", seq}, {"type", type}, {"t_sim", t_sim}, {"payload", payload}}; }

std::uint64_t EventHub::publish(std::string type, double t_sim, json payload) {
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(mu_);
    seq = next_seq_++;
    events_.push_back({seq, std::move(type), t_sim, std::move(payload)});
    while (events_.size() > capacity_) events_.pop_front();
  }
  cv_.notify_all();
  return seq;
}

std::optional<Event> EventHub::next(std::uint64_t& cursor, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  const bool ready = cv_.wait_for(lock, timeout, [&] { return closed_ || next_seq_ > cursor; });
  if (!ready || next_seq_ <= cursor) return std::nullopt;
  if (events_.empty()) return std::nullopt;
  // A reader that fell behind the retained window resumes at the oldest event.
  if (cursor < events_.front().seq) cursor = events_.front().seq;
  const Event& e = events_[static_cast<size_t>(cursor - events_.front().seq)];
  cursor = e.seq + 1;
  return e;
}

std::uint64_t EventHub::next_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_;
}

std::vector<Event> EventHub::snapshot() const {
  std::lock_guard lock(mu_);
  return {events_.begin(), events_.end()};
}

void EventHub::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventHub::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

json CommandOutcome::to_json() const {
  json recs = json::array();
  for (const auto& r : records) recs.push_back(record_to_json(r));
  json j = {{"compiled", compiled}, {"plan", plan}, {"t_llm", t_llm}, {"records", recs}};
  if (error_stage) {
    json v = json::array();
    for (const auto& x : violations) v.push_back({{"step", x.step}, {"rule", x.rule}, {"message", x.message}});
    j["error"] = {{"stage", *error_stage}, {"kind", error_kind}, {"message", error_message}, {"violations", v}};
  }
  return j;
}

std::string task_label(const plan::SkillCall& call) {
  std::string s = call.fn + "(";
  bool first = true;
  if (call.args.is_object()) {
    for (const auto& [k, v] : call.args.items()) {
      if (!first) s += ' ';
      first = false;
      s += v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return s + ")";
}

Session::Session(std::string id, geom::WorldMap map, SessionConfig cfg)
    : id_(std::move(id)), world_(std::move(map)), cfg_(std::move(cfg)), catalog_(skills::default_catalog()) {
  skills::check_catalog_closure(catalog_);
  robot_.pose = cfg_.start ? *cfg_.start : world_.start.value_or(geom::Pose2D{});
  if (geom::collision_check(world_, robot_.pose, cfg_.skills.robot_radius)) {
    throw Error(ErrorKind::kSetup, "session start pose collides with the map");
  }
  runner_ = std::make_unique<skills::SkillRunner>(world_, robot_, cfg_.skills, cfg_.navigator, cfg_.seed);
  runner_->set_cancel_flag(&cancel_);
  runner_->set_observer([this](double t, const skills::RobotState&) {
    refresh_snapshot(t);
    if (cfg_.stream) {
      std::lock_guard lock(snap_mu_);
      hub_.publish("state", t, snapshot_);
    }
  });
  refresh_snapshot(0.0);
}

std::unique_ptr<Session> Session::from_file(std::string id, const std::filesystem::path& map,
                                            SessionConfig cfg) {
  return std::make_unique<Session>(std::move(id), geom::load_world_file(map), std::move(cfg));
}

json Session::state_payload() const {
  const auto& p = robot_.pose;
  json items = json::array();
  for (const auto& it : world_.items) {
    items.push_back({{"name", it.name}, {"pose", {it.pose.x, it.pose.y, it.pose.theta}}, {"held", it.held}});
  }
  json ranges = json::array();
  const int n = std::max(1, cfg_.lidar_rays);
  const double step = n > 1 ? geom::kPi / (n - 1) : 0.0;
  for (int j = 0; j < n; ++j) {
    ranges.push_back(geom::ray_cast(world_, p, p.theta - geom::kPi / 2.0 + j * step, 0.12, 3.5));
  }
  return {{"robot", {{"pose", {p.x, p.y, p.theta}}, {"radius", cfg_.skills.robot_radius}}},
          {"arm", std::string(skills::to_string(robot_.arm))},
          {"gripper", {{"opening", robot_.gripper.opening}, {"velocity", robot_.gripper.velocity}}},
          {"held_item", robot_.held_item ? json(*robot_.held_item) : json(nullptr)},
          {"items", items},
          {"lidar", {{"angle_min", -geom::kPi / 2.0}, {"angle_max", geom::kPi / 2.0}, {"ranges", ranges}}}};
}

void Session::refresh_snapshot(double t) {
  json s = state_payload();
  std::lock_guard lock(snap_mu_);
  snapshot_ = std::move(s);
  clock_ = t;
}

json Session::state_json() const {
  std::lock_guard lock(snap_mu_);
  json s = snapshot_;
  s["session"] = id_;
  s["t_sim"] = clock_;
  s["busy"] = busy_.load();
  return s;
}

void Session::publish_state() {
  if (!cfg_.stream) return;
  std::lock_guard lock(snap_mu_);
  hub_.publish("state", clock_, snapshot_);
}

double Session::clock() const {
  std::lock_guard lock(snap_mu_);
  return clock_;
}

void Session::emit(const std::string& type, json payload) {
  if (cfg_.stream) hub_.publish(type, clock(), std::move(payload));
}

std::vector<TaskRecord> Session::records() const {
  std::lock_guard lock(snap_mu_);
  return records_;
}

MetricsReport Session::metrics() const { return metrics_report(records(), 1); }

CommandOutcome Session::submit_command(const std::string& text) {
  bool expected = false;
  if (!busy_.compare_exchange_strong(expected, true)) {
    throw Error(ErrorKind::kBusy, "session " + id_ + " is already executing a command");
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{busy_};
  std::lock_guard exec(exec_mu_);
  cancel_.store(false);

  CommandOutcome out;
  plan::CompileOptions opts;
  opts.validation.held_item = robot_.held_item;
  std::optional<plan::CompileResult> compiled;
  try {
    compiled.emplace(plan::compile(text, cfg_.backend, catalog_, world_, opts));
  } catch (const plan::CompileError& e) {
    out.error_stage = std::string(plan::to_string(e.stage()));
    out.error_kind = std::string(to_string(e.kind()));
    out.error_message = e.what();
    out.violations = e.report().violations;
    emit("error", {{"text", text}, {"stage", *out.error_stage}, {"kind", out.error_kind}, {"message", out.error_message}});
    return out;
  }
  out.compiled = true;
  out.t_llm = compiled->t_llm + cfg_.voice_latency;
  out.plan = plan::steps_to_json(compiled->plan.steps());
  emit("plan", {{"text", text}, {"steps", out.plan}, {"t_llm", out.t_llm}, {"backend", compiled->plan.plan().provenance.backend}});

  const auto& steps = compiled->plan.steps();
  const double share = out.t_llm / static_cast<double>(steps.size());
  bool aborted = false;
  for (size_t i = 0; i < steps.size(); ++i) {
    const auto& call = steps[i];
    const std::string label = task_label(call);
    TaskRecord rec;
    if (aborted) {
      rec = make_record(label, share, 0.0, false, "aborted: an earlier step failed");
      emit("step_finished", {{"index", i}, {"status", "aborted"}, {"record", record_to_json(rec)}});
    } else {
      emit("step_started", {{"index", i}, {"fn", call.fn}, {"args", call.args}, {"task", label}});
      skills::SkillResult res;
      bool ok = false;
      std::string detail;
      std::string status;
      try {
        res = runner_->invoke(call.fn, call.args);
        ok = res.ok();
        detail = res.reason;
        status = std::string(skills::to_string(res.status));
      } catch (const Error& e) {
        detail = e.what();
        status = "failure";
      }
      rec = make_record(label, share, res.duration, ok, detail);
      refresh_snapshot(runner_->clock());
      emit("step_finished", {{"index", i}, {"status", status}, {"record", record_to_json(rec)}});
      aborted = !ok;
    }
    std::lock_guard lock(snap_mu_);
    records_.push_back(rec);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace robotiq::service
