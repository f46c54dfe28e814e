#include "robotiq/rl/rollout.hpp"

#include <cmath>
#include <random>

#include "robotiq/error.hpp"

namespace robotiq::rl {

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const double> next_values, std::span<const unsigned char> episode_end,
                 double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& returns) {
  const size_t n = rewards.size();
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double running = 0.0;
  for (size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_values[t] - values[t];
    running = delta + (episode_end[t] ? 0.0 : gamma * lambda * running);
    advantages[t] = running;
    returns[t] = running + values[t];
  }
}

namespace {

double potential(const nav::NavEnv& env) { return std::log2(1.0 + env.shaped_value()); }

}  // namespace

Batch collect_rollouts(nav::NavEnv& env, const Policy& policy, int steps, std::uint64_t seed,
                       const TrainConfig& cfg) {
  if (steps < 1) throw Error(ErrorKind::kInvalidInput, "collect_rollouts: steps must be >= 1");
  std::mt19937_64 rng(seed);
  Batch b;
  b.obs_dim = policy.spec().obs_dim;
  const auto reserve = static_cast<size_t>(steps);
  b.obs.reserve(reserve * static_cast<size_t>(b.obs_dim));
  for (auto* v : {&b.actions, &b.logprobs, &b.rewards, &b.env_rewards, &b.values, &b.next_values}) {
    v->reserve(reserve);
  }

  const double q = env.config().q_bonus;
  auto obs = env.reset(rng()).flat();
  double phi = potential(env);
  for (int t = 0; t < steps; ++t) {
    const ActionSample s = policy.sample(obs, rng);
    const nav::StepResult r = env.step(s.action);
    const auto next_obs = r.observation.flat();

    double learner_reward = r.reward / cfg.reward_scale;
    if (cfg.reward_mode == RewardMode::kPotential) {
      double bonus = 0.0;
      double next_phi = 0.0;
      if (r.event == nav::Event::kGoal) bonus = q;
      if (r.event == nav::Event::kCollision) bonus = -q;
      if (r.event != nav::Event::kCollision) next_phi = potential(env);
      learner_reward = bonus / cfg.reward_scale + cfg.gamma * next_phi - phi;
      phi = next_phi;
    }

    b.obs.insert(b.obs.end(), obs.begin(), obs.end());
    b.actions.push_back(s.raw);
    b.logprobs.push_back(s.logprob);
    b.rewards.push_back(learner_reward);
    b.env_rewards.push_back(r.reward);
    b.values.push_back(s.value);

    const bool terminal = r.event == nav::Event::kGoal || r.event == nav::Event::kCollision;
    const bool last = t + 1 == steps;
    b.next_values.push_back(terminal ? 0.0 : (r.done || last) ? policy.value(next_obs) : 0.0);
    b.episode_end.push_back(r.done ? 1 : 0);

    if (r.done) {
      b.episode_returns.push_back(env.episode_return());
      b.episode_scores.push_back(env.episode_score());
      b.episode_events.push_back(r.event);
      if (!last) {
        obs = env.reset(rng()).flat();
        phi = potential(env);
      }
    } else {
      obs = next_obs;
    }
  }
  // Mid-episode values feed the recursion through next_values as well.
  for (size_t t = 0; t + 1 < b.size(); ++t) {
    if (!b.episode_end[t]) b.next_values[t] = b.values[t + 1];
  }
  compute_gae(b.rewards, b.values, b.next_values, b.episode_end, cfg.gamma, cfg.gae_lambda,
              b.advantages, b.returns);
  return b;
}

}  // namespace robotiq::rl
