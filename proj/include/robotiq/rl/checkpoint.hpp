#ifndef ROBOTIQ_RL_CHECKPOINT_HPP_
#define ROBOTIQ_RL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "robotiq/nav/env.hpp"
#include "robotiq/rl/policy.hpp"

namespace robotiq::rl {

// Stable hash of the env properties a policy depends on: ray count and
// resolution, range limits and the action spec.
std::string env_fingerprint(const nav::EnvConfig& cfg);

struct Checkpoint {
  Policy policy;
  int epoch = 0;
  double score = 0.0;  // mean normalized evaluation score
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string fingerprint;
  nav::EnvConfig env;  // config the policy was trained under
};

inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws Error(kIncompatible) when the policy cannot run in `cfg`.
void require_compatible(const Checkpoint& ckpt, const nav::EnvConfig& cfg);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_CHECKPOINT_HPP_
