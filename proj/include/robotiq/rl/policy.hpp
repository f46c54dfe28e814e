#ifndef ROBOTIQ_RL_POLICY_HPP_
#define ROBOTIQ_RL_POLICY_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "robotiq/nav/env.hpp"
#include "robotiq/rl/mlp.hpp"

namespace robotiq::rl {

struct PolicySpec {
  int obs_dim = 0;
  std::vector<int> hidden = {64, 64};
  nav::ActionSpec actions = nav::DiscreteActions{};
  std::vector<double> obs_scale;  // per-input divisor applied before the networks
  double init_log_std = -0.5;

  // Spec whose input width and scaling match `cfg` (ranges / r_max,
  // heading / pi, distance / d_max).
  static PolicySpec for_env(const nav::EnvConfig& cfg, std::vector<int> hidden);
};

// One sampled action. `raw` is what the log-probability refers to: the
// categorical index, or the pre-squash Gaussian sample.
struct ActionSample {
  nav::Action action;
  double raw = 0.0;
  double logprob = 0.0;
  double value = 0.0;
};

// Per-sample distribution quantities and their derivatives with respect to
// the actor head outputs (and log-std for Gaussian policies).
struct DistributionTerms {
  double logprob = 0.0;
  double entropy = 0.0;
  std::vector<double> dlogprob_dhead;  // actor output width
  std::vector<double> dentropy_dhead;
  double dlogprob_dlogstd = 0.0;
  double dentropy_dlogstd = 0.0;
};

// Actor-critic pair over one flat parameter vector:
// [actor MLP | log-std (continuous only) | critic MLP].
class Policy {
 public:
  Policy() = default;
  Policy(PolicySpec spec, std::uint64_t seed);

  const PolicySpec& spec() const { return spec_; }
  bool discrete() const { return std::holds_alternative<nav::DiscreteActions>(spec_.actions); }
  int action_count() const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  int num_parameters() const { return static_cast<int>(params_.size()); }

  int actor_begin() const { return 0; }
  int actor_end() const { return actor_.num_parameters() + (discrete() ? 0 : 1); }
  int critic_begin() const { return actor_end(); }
  int critic_end() const { return num_parameters(); }
  int log_std_index() const { return actor_.num_parameters(); }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }

  std::vector<double> normalize(std::span<const double> obs) const;

  ActionSample sample(std::span<const double> obs, std::mt19937_64& rng) const;
  nav::Action act_deterministic(std::span<const double> obs) const;
  double value(std::span<const double> obs) const;

  // Maps a raw sample to the env action (index or squashed angular rate).
  nav::Action to_env_action(double raw) const;

  // Distribution terms for `raw` at `obs` under `params`; ws caches the
  // actor pass so the caller can backpropagate.
  DistributionTerms distribution(std::span<const double> params, std::span<const double> norm_obs,
                                 double raw, MlpWorkspace& ws) const;

  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);

 private:
  PolicySpec spec_;
  Mlp actor_;
  Mlp critic_;
  std::vector<double> params_;
};

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_POLICY_HPP_
