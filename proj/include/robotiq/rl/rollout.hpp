#ifndef ROBOTIQ_RL_ROLLOUT_HPP_
#define ROBOTIQ_RL_ROLLOUT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "robotiq/nav/env.hpp"
#include "robotiq/rl/config.hpp"
#include "robotiq/rl/policy.hpp"

namespace robotiq::rl {

// On-policy transitions in collection order. Observations are raw (the
// policy normalizes internally).
struct Batch {
  int obs_dim = 0;
  std::vector<double> obs;          // size() * obs_dim
  std::vector<double> actions;      // raw samples (index or pre-squash value)
  std::vector<double> logprobs;
  std::vector<double> rewards;      // learner rewards
  std::vector<double> env_rewards;  // rewards as returned by the env
  std::vector<double> values;
  std::vector<double> next_values;  // bootstrap value of s_{t+1}; 0 after goal/collision
  std::vector<unsigned char> episode_end;  // 1 where the episode stops after t
  std::vector<double> advantages;
  std::vector<double> returns;

  // Completed episodes.
  std::vector<double> episode_returns;
  std::vector<double> episode_scores;
  std::vector<nav::Event> episode_events;

  size_t size() const { return actions.size(); }
  std::span<const double> observation(size_t t) const {
    return std::span(obs).subspan(t * static_cast<size_t>(obs_dim), static_cast<size_t>(obs_dim));
  }
};

// Generalized advantage estimation:
//   delta_t = r_t + gamma * next_value_t - value_t
//   A_t = delta_t + gamma * lambda * (1 - end_t) * A_{t+1}
// returns_t = A_t + value_t.
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const double> next_values, std::span<const unsigned char> episode_end,
                 double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& returns);

// Runs `steps` transitions (at least one) starting from a fresh episode.
// Episodes are cut at terminals; the trailing partial episode is
// bootstrapped from the critic. Advantages are filled with GAE.
Batch collect_rollouts(nav::NavEnv& env, const Policy& policy, int steps, std::uint64_t seed,
                       const TrainConfig& cfg);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_ROLLOUT_HPP_
