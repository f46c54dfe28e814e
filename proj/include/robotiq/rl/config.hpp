#ifndef ROBOTIQ_RL_CONFIG_HPP_
#define ROBOTIQ_RL_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace robotiq::rl {

enum class Algorithm { kVpg, kPpo };

Algorithm algorithm_from_string(std::string_view name);
std::string_view to_string(Algorithm a);

// How env rewards become learner rewards.
//  kRaw:       r / reward_scale.
//  kPotential: +-q_bonus / reward_scale on goal/collision, plus the
//              potential difference gamma * P(s') - P(s) with
//              P = log2(1 + shaped reward), P = 0 after a collision.
enum class RewardMode { kRaw, kPotential };

struct TrainConfig {
  Algorithm algorithm = Algorithm::kPpo;
  int epochs = 60;
  int steps_per_epoch = 1000;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double pi_lr = 1e-3;
  double vf_lr = 1e-3;
  int update_epochs = 10;    // PPO passes over the batch
  int minibatch_size = 250;  // PPO
  int vf_iters = 40;         // VPG value-regression steps
  double ent_coef = 0.0;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
  double target_kl = 0.05;   // PPO early stop; 0 disables
  bool normalize_advantages = true;
  std::vector<int> hidden = {64, 64};
  double init_log_std = -0.5;
  std::vector<std::uint64_t> seeds = {0};
  int eval_episodes = 10;
  std::uint64_t eval_seed_base = 1000000;
  RewardMode reward_mode = RewardMode::kPotential;
  double reward_scale = 20.0;

  // Throws Error(kInvalidSpec).
  void validate() const;

  // Defaults per algorithm (VPG takes one larger policy step per epoch).
  static TrainConfig defaults_for(Algorithm algorithm);
};

TrainConfig train_config_from_json(const nlohmann::json& j, Algorithm algorithm);
nlohmann::json train_config_to_json(const TrainConfig& cfg);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_CONFIG_HPP_
