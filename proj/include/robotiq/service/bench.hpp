#ifndef ROBOTIQ_SERVICE_BENCH_HPP_
#define ROBOTIQ_SERVICE_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "robotiq/geom/world.hpp"
#include "robotiq/service/metrics.hpp"
#include "robotiq/service/session.hpp"

namespace robotiq::service {

struct BenchConfig {
  geom::WorldMap map;
  std::vector<std::string> script;  // commands run in order every trial
  int trials = 50;
  std::uint64_t seed = 0;
  SessionConfig session;  // backend, navigator, skills, voice latency
  double jitter_xy = 0.1;      // start pose jitter, uniform +-
  double jitter_theta = 0.3;
};

struct BenchResult {
  std::vector<TaskRecord> records;  // trial-major, 1-based trial numbers
  MetricsReport report;
};

// Never throws for per-trial failures; those are records. Throws
// Error(kInvalidInput) for trials < 1 or an empty script.
BenchResult run_bench(const BenchConfig& cfg);

// One command per line; blank lines and '#' comments are skipped.
std::vector<std::string> load_script(const std::filesystem::path& path);

}  // namespace robotiq::service

#endif  // ROBOTIQ_SERVICE_BENCH_HPP_
