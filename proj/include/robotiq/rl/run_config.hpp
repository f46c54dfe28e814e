#ifndef ROBOTIQ_RL_RUN_CONFIG_HPP_
#define ROBOTIQ_RL_RUN_CONFIG_HPP_

#include <filesystem>
#include <optional>

#include "robotiq/geom/world.hpp"
#include "robotiq/nav/env.hpp"
#include "robotiq/rl/config.hpp"

namespace robotiq::rl {

// A training run file: {"map": path, "env": {...}, "train": {...},
// "transfer": {"env": {...overrides}, "episodes": N}}. The map path is
// relative to the file.
struct RunConfig {
  geom::WorldMap map;
  nav::EnvConfig env;
  TrainConfig train;
  std::optional<nav::EnvConfig> transfer_env;
  int transfer_episodes = 50;
};

RunConfig load_run_config(const std::filesystem::path& path, Algorithm algorithm);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_RUN_CONFIG_HPP_
