#include "robotiq/service/bench.hpp"

#include <fstream>
#include <random>

#include "robotiq/error.hpp"

namespace robotiq::service {

std::vector<std::string> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, "script not found: " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    lines.push_back(line.substr(b, e - b + 1));
  }
  return lines;
}

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorKind::kInvalidInput, "bench: trials must be >= 1");
  if (cfg.script.empty()) throw Error(ErrorKind::kInvalidInput, "bench: empty command script");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const geom::Pose2D base = cfg.map.start.value_or(geom::Pose2D{});

  BenchResult out;
  for (int trial = 1; trial <= cfg.trials; ++trial) {
    SessionConfig sc = cfg.session;
    sc.stream = false;
    sc.seed = rng();
    geom::Pose2D start = base;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      start = {base.x + cfg.jitter_xy * unit(rng), base.y + cfg.jitter_xy * unit(rng),
               geom::wrap_angle(base.theta + cfg.jitter_theta * unit(rng))};
      if (!geom::collision_check(cfg.map, start, sc.skills.robot_radius)) break;
      start = base;
    }
    sc.start = start;
    Session session("bench-" + std::to_string(trial), cfg.map, sc);
    for (const auto& command : cfg.script) {
      CommandOutcome o = session.submit_command(command);
      if (!o.compiled) {
        out.records.push_back(make_record("compile", o.t_llm, 0.0, false, o.error_message, trial));
        continue;
      }
      for (auto& r : o.records) {
        r.trial = trial;
        out.records.push_back(std::move(r));
      }
    }
  }
  out.report = metrics_report(out.records, cfg.trials);
  return out;
}

}  // namespace robotiq::service
