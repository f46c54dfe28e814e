#ifndef ROBOTIQ_RL_TRAINER_HPP_
#define ROBOTIQ_RL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "robotiq/nav/env.hpp"
#include "robotiq/rl/checkpoint.hpp"
#include "robotiq/rl/config.hpp"
#include "robotiq/rl/policy.hpp"

namespace robotiq::rl {

struct EpochStats {
  int epoch = 0;
  double mean_score = 0.0;  // deterministic evaluation
  double std_score = 0.0;
  int episodes = 0;
  double train_mean_score = 0.0;  // episodes completed while collecting
  int train_episodes = 0;
  double best_score = 0.0;  // best evaluation so far
};

struct LearningCurve {
  std::uint64_t seed = 0;
  std::vector<EpochStats> epochs;  // epochs[0] is the initial policy

  // Mean evaluation score over the last `fraction` of epochs (at least one).
  double tail_mean(double fraction) const;
  double max_score() const;
};

struct TrainResult {
  std::vector<LearningCurve> curves;  // one per seed
  LearningCurve aggregate;            // mean over seeds; std across seeds
  std::vector<Checkpoint> best_per_seed;
  Checkpoint best;                    // best over all seeds
};

using EnvFactory = std::function<nav::NavEnv()>;
using EpochCallback = std::function<void(std::uint64_t seed, const EpochStats&)>;

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Single seed, exposed for tests.
LearningCurve train_seed(const EnvFactory& make_env, const TrainConfig& cfg, std::uint64_t seed,
                         Checkpoint& best, const EpochCallback& on_epoch = {});

struct EvalResult {
  double success_rate = 0.0;
  double mean_score = 0.0;
  double std_score = 0.0;
  double mean_steps_to_goal = 0.0;  // over successful episodes; 0 if none
  std::vector<double> scores;
  std::vector<nav::Event> events;
  std::vector<int> steps;
};

// Any deterministic controller: observation -> action.
using Controller = std::function<nav::Action(const nav::Observation&)>;

// Runs `episodes` episodes with reset seeds seed_base + i.
EvalResult evaluate_controller(nav::NavEnv& env, const Controller& controller, int episodes,
                               std::uint64_t seed_base);
EvalResult evaluate_policy(nav::NavEnv& env, const Policy& policy, int episodes,
                           std::uint64_t seed_base);

// Checks the fingerprint first (Error(kIncompatible) on mismatch).
EvalResult evaluate(const Checkpoint& ckpt, nav::NavEnv& env, int episodes,
                    std::uint64_t seed_base = 1000000);

// Zero-shot run of a frozen checkpoint on a different map/goal. The score
// series is per episode, in order.
EvalResult transfer_eval(const Checkpoint& ckpt, nav::NavEnv& target_env, int episodes,
                         std::uint64_t seed_base = 2000000);

// CSV with header epoch,seed,mean_score,std_score,episodes.
void write_curve_csv(std::ostream& out, const std::vector<LearningCurve>& curves);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_TRAINER_HPP_
