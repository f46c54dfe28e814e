#include "robotiq/rl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "robotiq/error.hpp"
#include "robotiq/rl/rollout.hpp"
#include "robotiq/rl/update.hpp"

namespace robotiq::rl {

using nlohmann::json;

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "ppo") return Algorithm::kPpo;
  if (name == "vpg") return Algorithm::kVpg;
  throw Error(ErrorKind::kInvalidSpec, "unknown algorithm '" + std::string(name) + "' (ppo|vpg)");
}

std::string_view to_string(Algorithm a) { return a == Algorithm::kPpo ? "ppo" : "vpg"; }

void TrainConfig::validate() const {
  const auto bad = [](const std::string& m) { throw Error(ErrorKind::kInvalidSpec, "train config: " + m); };
  if (epochs < 0) bad("epochs must be >= 0");
  if (steps_per_epoch < 1) bad("steps_per_epoch must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) bad("gamma must be in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) bad("gae_lambda must be in [0, 1]");
  if (!(clip_ratio > 0.0)) bad("clip_ratio must be > 0");
  if (!(pi_lr > 0.0 && vf_lr > 0.0)) bad("learning rates must be > 0");
  if (update_epochs < 1 || minibatch_size < 1) bad("update_epochs and minibatch_size must be >= 1");
  if (seeds.empty()) bad("at least one seed is required");
  if (eval_episodes < 1) bad("eval_episodes must be >= 1");
  if (!(reward_scale > 0.0)) bad("reward_scale must be > 0");
}

TrainConfig TrainConfig::defaults_for(Algorithm algorithm) {
  TrainConfig c;
  c.algorithm = algorithm;
  if (algorithm == Algorithm::kVpg) {
    c.pi_lr = 3e-3;
    c.vf_lr = 1e-3;
  }
  return c;
}

TrainConfig train_config_from_json(const json& j, Algorithm algorithm) {
  TrainConfig c = TrainConfig::defaults_for(algorithm);
  c.epochs = j.value("epochs", c.epochs);
  c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
  c.update_epochs = j.value("update_epochs", c.update_epochs);
  c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
  c.vf_iters = j.value("vf_iters", c.vf_iters);
  c.ent_coef = j.value("ent_coef", c.ent_coef);
  c.vf_coef = j.value("vf_coef", c.vf_coef);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.target_kl = j.value("target_kl", c.target_kl);
  c.hidden = j.value("hidden", c.hidden);
  c.init_log_std = j.value("init_log_std", c.init_log_std);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.reward_scale = j.value("reward_scale", c.reward_scale);
  if (auto it = j.find("seeds"); it != j.end()) c.seeds = it->get<std::vector<std::uint64_t>>();
  // Learning rates may be given per algorithm: {"pi_lr": {"ppo": .., "vpg": ..}}.
  const auto lr = [&](const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (it->is_object()) return it->value(std::string(to_string(algorithm)), fallback);
    return it->get<double>();
  };
  c.pi_lr = lr("pi_lr", c.pi_lr);
  c.vf_lr = lr("vf_lr", c.vf_lr);
  if (auto it = j.find("reward_mode"); it != j.end()) {
    const auto m = it->get<std::string>();
    if (m == "raw") {
      c.reward_mode = RewardMode::kRaw;
    } else if (m == "potential") {
      c.reward_mode = RewardMode::kPotential;
    } else {
      throw Error(ErrorKind::kInvalidSpec, "unknown reward_mode '" + m + "'");
    }
  }
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"algorithm", std::string(to_string(c.algorithm))},
          {"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_ratio", c.clip_ratio},
          {"pi_lr", c.pi_lr},
          {"vf_lr", c.vf_lr},
          {"update_epochs", c.update_epochs},
          {"minibatch_size", c.minibatch_size},
          {"vf_iters", c.vf_iters},
          {"ent_coef", c.ent_coef},
          {"vf_coef", c.vf_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"target_kl", c.target_kl},
          {"hidden", c.hidden},
          {"seeds", c.seeds},
          {"eval_episodes", c.eval_episodes},
          {"reward_mode", c.reward_mode == RewardMode::kRaw ? "raw" : "potential"},
          {"reward_scale", c.reward_scale}};
}

double LearningCurve::tail_mean(double fraction) const {
  if (epochs.size() <= 1) return epochs.empty() ? 0.0 : epochs.front().mean_score;
  const size_t trained = epochs.size() - 1;
  const size_t k = std::max<size_t>(1, static_cast<size_t>(std::ceil(fraction * trained - 1e-9)));
  double s = 0.0;
  for (size_t i = epochs.size() - k; i < epochs.size(); ++i) s += epochs[i].mean_score;
  return s / static_cast<double>(k);
}

double LearningCurve::max_score() const {
  double m = 0.0;
  for (const auto& e : epochs) m = std::max(m, e.mean_score);
  return m;
}

namespace {

void summarize(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

EvalResult evaluate_controller(nav::NavEnv& env, const Controller& controller, int episodes,
                               std::uint64_t seed_base) {
  if (episodes < 1) throw Error(ErrorKind::kInvalidInput, "evaluate: episodes must be >= 1");
  EvalResult r;
  int successes = 0;
  double steps_to_goal = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    nav::Observation obs = env.reset(seed_base + static_cast<std::uint64_t>(ep));
    nav::StepResult s;
    do {
      s = env.step(controller(obs));
      obs = s.observation;
    } while (!s.done);
    r.scores.push_back(env.episode_score());
    r.events.push_back(s.event);
    r.steps.push_back(env.context().step_count);
    if (s.event == nav::Event::kGoal) {
      ++successes;
      steps_to_goal += env.context().step_count;
    }
  }
  r.success_rate = static_cast<double>(successes) / episodes;
  r.mean_steps_to_goal = successes > 0 ? steps_to_goal / successes : 0.0;
  summarize(r.scores, r.mean_score, r.std_score);
  return r;
}

EvalResult evaluate_policy(nav::NavEnv& env, const Policy& policy, int episodes,
                           std::uint64_t seed_base) {
  return evaluate_controller(
      env, [&](const nav::Observation& o) { return policy.act_deterministic(o.flat()); }, episodes,
      seed_base);
}

EvalResult evaluate(const Checkpoint& ckpt, nav::NavEnv& env, int episodes,
                    std::uint64_t seed_base) {
  require_compatible(ckpt, env.config());
  return evaluate_policy(env, ckpt.policy, episodes, seed_base);
}

EvalResult transfer_eval(const Checkpoint& ckpt, nav::NavEnv& target_env, int episodes,
                         std::uint64_t seed_base) {
  // Frozen weights: evaluation never touches ckpt.policy's parameters.
  return evaluate(ckpt, target_env, episodes, seed_base);
}

LearningCurve train_seed(const EnvFactory& make_env, const TrainConfig& cfg, std::uint64_t seed,
                         Checkpoint& best, const EpochCallback& on_epoch) {
  cfg.validate();
  nav::NavEnv env = make_env();
  nav::NavEnv eval_env = make_env();
  Policy policy(PolicySpec::for_env(env.config(), cfg.hidden), seed);
  if (!policy.discrete()) policy.params()[static_cast<size_t>(policy.log_std_index())] = cfg.init_log_std;
  OptimizerState opt = OptimizerState::for_policy(policy, cfg);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);

  LearningCurve curve;
  curve.seed = seed;
  best = Checkpoint{policy, 0, -1.0, seed, std::string(to_string(cfg.algorithm)),
                    env_fingerprint(env.config()), env.config()};

  const auto record = [&](int epoch, const Batch* batch) {
    const EvalResult ev = evaluate_policy(eval_env, policy, cfg.eval_episodes, cfg.eval_seed_base);
    EpochStats st;
    st.epoch = epoch;
    st.mean_score = ev.mean_score;
    st.std_score = ev.std_score;
    st.episodes = cfg.eval_episodes;
    if (batch != nullptr && !batch->episode_scores.empty()) {
      double sd = 0.0;
      summarize(batch->episode_scores, st.train_mean_score, sd);
      st.train_episodes = static_cast<int>(batch->episode_scores.size());
    }
    if (ev.mean_score > best.score) {
      best.policy = policy;
      best.epoch = epoch;
      best.score = ev.mean_score;
    }
    st.best_score = best.score;
    curve.epochs.push_back(st);
    if (on_epoch) on_epoch(seed, st);
  };

  record(0, nullptr);
  int nan_streak = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Batch batch = collect_rollouts(env, policy, cfg.steps_per_epoch, rng(), cfg);
    const UpdateDiagnostics diag = policy_update(policy, opt, batch, cfg, rng());
    if (diag.nan_guard) {
      if (++nan_streak >= 3) {
        throw Error(ErrorKind::kTrainingFailure,
                    "training failed at epoch " + std::to_string(epoch) + ": " + diag.message +
                        " (3 consecutive updates)");
      }
    } else {
      nan_streak = 0;
    }
    record(epoch, &batch);
  }
  return curve;
}

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  TrainResult result;
  for (std::uint64_t seed : cfg.seeds) {
    Checkpoint best;
    result.curves.push_back(train_seed(make_env, cfg, seed, best, on_epoch));
    result.best_per_seed.push_back(best);
  }
  result.best = *std::max_element(result.best_per_seed.begin(), result.best_per_seed.end(),
                                  [](const Checkpoint& a, const Checkpoint& b) { return a.score < b.score; });

  const size_t n_epochs = result.curves.front().epochs.size();
  for (size_t e = 0; e < n_epochs; ++e) {
    std::vector<double> means;
    EpochStats agg;
    agg.epoch = static_cast<int>(e);
    for (const auto& c : result.curves) {
      means.push_back(c.epochs[e].mean_score);
      agg.episodes += c.epochs[e].episodes;
      agg.best_score = std::max(agg.best_score, c.epochs[e].best_score);
    }
    summarize(means, agg.mean_score, agg.std_score);
    result.aggregate.epochs.push_back(agg);
  }
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<LearningCurve>& curves) {
  out << "epoch,seed,mean_score,std_score,episodes\n";
  char buf[160];
  for (const auto& c : curves) {
    for (const auto& e : c.epochs) {
      std::snprintf(buf, sizeof buf, "%d,%llu,%.6f,%.6f,%d\n", e.epoch,
                    static_cast<unsigned long long>(c.seed), e.mean_score, e.std_score, e.episodes);
      out << buf;
    }
  }
}

}  // namespace robotiq::rl
