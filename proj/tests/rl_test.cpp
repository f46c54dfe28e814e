#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"
#include "robotiq/rl/checkpoint.hpp"
#include "robotiq/rl/config.hpp"
#include "robotiq/rl/mlp.hpp"
#include "robotiq/rl/policy.hpp"
#include "robotiq/rl/rollout.hpp"
#include "robotiq/rl/run_config.hpp"
#include "robotiq/rl/trainer.hpp"
#include "robotiq/rl/update.hpp"

using namespace robotiq;
using namespace robotiq::rl;

namespace {

const std::string kData = ROBOTIQ_DATA_DIR;

geom::WorldMap corridor() { return geom::load_world_file(kData + "/maps/corridor.json"); }

nav::EnvConfig corridor_env() {
  nav::EnvConfig cfg;
  cfg.fixed_start = geom::Pose2D{0.5, 0.6, 0};
  cfg.fixed_goal = geom::Vec2{3.0, 0.6};
  return cfg;
}

// Small synthetic batch over a 4-wide observation.
Batch synthetic_batch(const Policy& p, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Batch b;
  b.obs_dim = p.spec().obs_dim;
  for (int t = 0; t < n; ++t) {
    std::vector<double> o;
    for (int k = 0; k < b.obs_dim; ++k) o.push_back(g(rng));
    b.obs.insert(b.obs.end(), o.begin(), o.end());
    const auto s = p.sample(o, rng);
    b.actions.push_back(s.raw);
    // Behavior log-probs away from the current ones so PPO ratios differ from 1.
    b.logprobs.push_back(s.logprob + 0.05 * g(rng));
    b.values.push_back(s.value);
    b.advantages.push_back(g(rng));
    b.returns.push_back(g(rng));
    b.rewards.push_back(0);
  }
  return b;
}

Policy small_policy(nav::ActionSpec actions, std::uint64_t seed) {
  PolicySpec spec;
  spec.obs_dim = 4;
  spec.hidden = {6};
  spec.actions = actions;
  return Policy(spec, seed);
}

void check_gradient(const Policy& p, const Batch& b, const TrainConfig& cfg, const LossWeights& w) {
  std::vector<size_t> idx(b.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> grad(p.params().size(), 0.0);
  compute_loss(p, p.params(), b, idx, cfg, w, grad);
  std::vector<double> x = p.params();
  const double h = 1e-6;
  for (size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = compute_loss(p, x, b, idx, cfg, w, {}).total;
    x[i] = keep - h;
    const double down = compute_loss(p, x, b, idx, cfg, w, {}).total;
    x[i] = keep;
    const double fd = (up - down) / (2 * h);
    EXPECT_LE(std::abs(grad[i] - fd), 1e-4 * std::max(1.0, std::abs(fd))) << "param " << i;
  }
}

}  // namespace

TEST(Mlp, ForwardMatchesHandComputation) {
  Mlp net({2, 2, 1});
  // Layer 1: W = [[1, 2], [3, 4]], b = [0.1, -0.1]; layer 2: W = [[0.5, -1]], b = [0.2].
  std::vector<double> p{1, 2, 3, 4, 0.1, -0.1, 0.5, -1, 0.2};
  ASSERT_EQ(net.num_parameters(), 9);
  MlpWorkspace ws;
  const std::vector<double> in{0.3, -0.2};
  const auto out = net.forward(p, in, ws);
  const double h1 = std::tanh(0.3 - 0.4 + 0.1), h2 = std::tanh(0.9 - 0.8 - 0.1);
  EXPECT_NEAR(out[0], 0.5 * h1 - h2 + 0.2, 1e-15);
}

TEST(Gradient, DiscreteVpgMatchesFiniteDifferences) {
  auto p = small_policy(nav::DiscreteActions{5, 1.5}, 1);
  auto cfg = TrainConfig::defaults_for(Algorithm::kVpg);
  cfg.normalize_advantages = false;
  check_gradient(p, synthetic_batch(p, 8, 2), cfg, {1.0, 0.01, 0.5});
}

TEST(Gradient, DiscretePpoMatchesFiniteDifferences) {
  auto p = small_policy(nav::DiscreteActions{5, 1.5}, 3);
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  check_gradient(p, synthetic_batch(p, 8, 4), cfg, {1.0, 0.01, 0.5});
}

TEST(Gradient, GaussianPolicyMatchesFiniteDifferences) {
  auto p = small_policy(nav::ContinuousActions{-1.5, 1.5}, 5);
  for (auto algo : {Algorithm::kVpg, Algorithm::kPpo}) {
    auto cfg = TrainConfig::defaults_for(algo);
    check_gradient(p, synthetic_batch(p, 8, 6), cfg, {1.0, 0.01, 0.5});
  }
}

TEST(Gradient, SingleTransition) {
  auto p = small_policy(nav::DiscreteActions{3, 1.0}, 7);
  auto cfg = TrainConfig::defaults_for(Algorithm::kVpg);
  cfg.normalize_advantages = false;
  check_gradient(p, synthetic_batch(p, 1, 8), cfg, {1.0, 0.0, 0.0});
}

TEST(Ppo, ClipBoundaryHasZeroPolicyGradient) {
  auto p = small_policy(nav::DiscreteActions{5, 1.5}, 9);
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  cfg.normalize_advantages = false;
  auto b = synthetic_batch(p, 4, 10);
  MlpWorkspace ws;
  for (size_t t = 0; t < b.size(); ++t) {
    const auto norm = p.normalize(b.observation(t));
    const double lp = p.distribution(p.params(), norm, b.actions[t], ws).logprob;
    b.logprobs[t] = lp - std::log(1.0 + cfg.clip_ratio);  // ratio = 1 + clip
    b.advantages[t] = 1.0 + static_cast<double>(t);
  }
  std::vector<size_t> idx{0, 1, 2, 3};
  std::vector<double> grad(p.params().size(), 0.0);
  const auto loss = compute_loss(p, p.params(), b, idx, cfg, {1.0, 0.0, 0.0}, grad);
  for (double g : grad) EXPECT_EQ(g, 0.0);
  EXPECT_NEAR(loss.policy_loss, -(1 + cfg.clip_ratio) * 2.5, 1e-12);
}

TEST(Update, ZeroAdvantagesLeaveActorUnchanged) {
  for (auto algo : {Algorithm::kVpg, Algorithm::kPpo}) {
    auto p = small_policy(nav::DiscreteActions{5, 1.5}, 11);
    auto cfg = TrainConfig::defaults_for(algo);
    auto b = synthetic_batch(p, 16, 12);
    std::fill(b.advantages.begin(), b.advantages.end(), 0.0);
    const auto before = p.params();
    auto opt = OptimizerState::for_policy(p, cfg);
    const auto d = policy_update(p, opt, b, cfg, 1);
    EXPECT_FALSE(d.nan_guard);
    for (int i = p.actor_begin(); i < p.actor_end(); ++i) EXPECT_EQ(p.params()[i], before[i]);
    bool critic_moved = false;
    for (int i = p.critic_begin(); i < p.critic_end(); ++i) critic_moved |= p.params()[i] != before[i];
    EXPECT_TRUE(critic_moved);
  }
}

TEST(Update, NanGuardRestoresParameters) {
  auto p = small_policy(nav::DiscreteActions{5, 1.5}, 13);
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  auto b = synthetic_batch(p, 8, 14);
  b.returns[3] = std::nan("");
  const auto before = p.params();
  auto opt = OptimizerState::for_policy(p, cfg);
  const auto d = policy_update(p, opt, b, cfg, 1);
  EXPECT_TRUE(d.nan_guard);
  EXPECT_EQ(p.params(), before);
}

TEST(Gae, LambdaOneGammaOneIsRewardToGoMinusValue) {
  const std::vector<double> r{1, -2, 0.5, 3, 1.5}, v{0.2, 0.1, -0.3, 0.7, 0.4};
  const std::vector<double> next{0.1, -0.3, 0.7, 0.4, 0};
  const std::vector<unsigned char> end{0, 0, 0, 0, 1};
  std::vector<double> adv, ret;
  compute_gae(r, v, next, end, 1.0, 1.0, adv, ret);
  double togo = 0;
  for (int t = 4; t >= 0; --t) {
    togo += r[static_cast<size_t>(t)];
    EXPECT_NEAR(adv[static_cast<size_t>(t)], togo - v[static_cast<size_t>(t)], 1e-12);
    EXPECT_NEAR(ret[static_cast<size_t>(t)], togo, 1e-12);
  }
}

TEST(Gae, GammaZeroIsOneStepResidual) {
  const std::vector<double> r{1, 2, 3}, v{0.5, 1.5, -1}, next{1.5, -1, 2};
  const std::vector<unsigned char> end{0, 0, 0};
  std::vector<double> adv, ret;
  compute_gae(r, v, next, end, 0.0, 0.95, adv, ret);
  for (size_t t = 0; t < 3; ++t) EXPECT_NEAR(adv[t], r[t] - v[t], 1e-15);
}

TEST(Gae, EpisodeBoundaryStopsAccumulation) {
  const std::vector<double> r{1, 1, 1, 1}, v{0, 0, 0, 0}, next{0, 0, 0, 0};
  const std::vector<unsigned char> end{0, 1, 0, 1};
  std::vector<double> adv, ret;
  compute_gae(r, v, next, end, 0.9, 1.0, adv, ret);
  EXPECT_NEAR(adv[1], 1, 1e-15);
  EXPECT_NEAR(adv[0], 1 + 0.9, 1e-15);
  EXPECT_NEAR(adv[2], 1 + 0.9, 1e-15);
}

TEST(Rollout, SingleStepAndDeterminism) {
  nav::NavEnv env(corridor(), corridor_env());
  Policy p(PolicySpec::for_env(env.config(), {16}), 1);
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  const auto one = collect_rollouts(env, p, 1, 5, cfg);
  ASSERT_EQ(one.size(), 1u);
  // The cut-off episode is bootstrapped from the critic, not terminated.
  EXPECT_EQ(one.episode_end.back(), 0);
  EXPECT_NE(one.next_values.back(), 0.0);
  EXPECT_EQ(one.obs.size(), one.size() * static_cast<size_t>(one.obs_dim));

  nav::NavEnv e1(corridor(), corridor_env()), e2(corridor(), corridor_env());
  const auto a = collect_rollouts(e1, p, 300, 7, cfg);
  const auto b = collect_rollouts(e2, p, 300, 7, cfg);
  EXPECT_EQ(a.obs, b.obs);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.logprobs, b.logprobs);
  EXPECT_EQ(a.rewards, b.rewards);
  EXPECT_EQ(a.advantages, b.advantages);
  for (double s : a.episode_scores) {
    EXPECT_GE(s, 0);
    EXPECT_LE(s, 1);
  }
}

TEST(Config, ValidationAndJson) {
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  EXPECT_NO_THROW(cfg.validate());
  cfg.gamma = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(algorithm_from_string("ddpg"), Error);
  const auto j = nlohmann::json::parse(
      R"({"epochs": 3, "pi_lr": {"ppo": 0.01, "vpg": 0.02}, "seeds": [4, 5]})");
  EXPECT_EQ(train_config_from_json(j, Algorithm::kVpg).pi_lr, 0.02);
  const auto ppo = train_config_from_json(j, Algorithm::kPpo);
  EXPECT_EQ(ppo.pi_lr, 0.01);
  EXPECT_EQ(ppo.epochs, 3);
  EXPECT_EQ(ppo.seeds, (std::vector<std::uint64_t>{4, 5}));
  const auto back = train_config_from_json(train_config_to_json(ppo), Algorithm::kPpo);
  EXPECT_EQ(back.epochs, 3);
  EXPECT_EQ(back.pi_lr, 0.01);
}

TEST(RunConfig, LoadsShippedConfigs) {
  const auto rc = load_run_config(kData + "/configs/obstacle_room.json", Algorithm::kPpo);
  EXPECT_EQ(rc.map.name, "obstacle_room");
  ASSERT_TRUE(rc.transfer_env.has_value());
  EXPECT_EQ(rc.transfer_env->goal_location, "relocated_goal");
  EXPECT_EQ(rc.train.seeds.size(), 3u);
}

TEST(Evaluate, ScriptedStraightPolicySolvesCorridor) {
  nav::NavEnv env(corridor(), corridor_env());
  const auto r = evaluate_controller(env, [](const nav::Observation&) { return nav::Action{2}; }, 5, 0);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_GE(r.mean_score, 0.9);
}

TEST(Evaluate, WallSeekingPolicyCollides) {
  auto cfg = corridor_env();
  cfg.fixed_start = geom::Pose2D{0.5, 0.6, geom::kPi / 2};
  nav::NavEnv env(corridor(), cfg);
  const auto r = evaluate_controller(env, [](const nav::Observation&) { return nav::Action{2}; }, 5, 0);
  EXPECT_EQ(r.success_rate, 0.0);
  for (auto e : r.events) EXPECT_EQ(e, nav::Event::kCollision);
  EXPECT_LT(r.mean_score, 0.1);
}

TEST(Evaluate, RandomPolicyMatchesRecordedRollouts) {
  nav::EnvConfig cfg;
  const auto map = geom::load_world_file(kData + "/maps/obstacle_room.json");
  nav::NavEnv env(map, cfg);
  Policy p(PolicySpec::for_env(env.config(), {8}), 3);
  const auto r = evaluate_policy(env, p, 10, 500);
  // Replay the same seeds by hand.
  int goals = 0;
  for (int i = 0; i < 10; ++i) {
    nav::NavEnv e(map, cfg);
    auto obs = e.reset(500 + static_cast<std::uint64_t>(i));
    nav::StepResult s;
    do {
      s = e.step(p.act_deterministic(obs.flat()));
      obs = s.observation;
    } while (!s.done);
    goals += s.event == nav::Event::kGoal;
    EXPECT_DOUBLE_EQ(r.scores[static_cast<size_t>(i)], e.episode_score());
  }
  EXPECT_DOUBLE_EQ(r.success_rate, goals / 10.0);
}

TEST(Train, ZeroEpochsEvaluatesInitialPolicyOnly) {
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  cfg.epochs = 0;
  cfg.seeds = {0};
  const auto r = train([] { return nav::NavEnv(corridor(), corridor_env()); }, cfg);
  ASSERT_EQ(r.curves.size(), 1u);
  EXPECT_EQ(r.curves[0].epochs.size(), 1u);
  EXPECT_EQ(r.curves[0].epochs[0].epoch, 0);
}

TEST(Train, SeedDeterminismMonotoneBestAndScoreRange) {
  auto cfg = TrainConfig::defaults_for(Algorithm::kPpo);
  cfg.epochs = 3;
  cfg.steps_per_epoch = 300;
  cfg.seeds = {1};
  cfg.eval_episodes = 3;
  const auto make = [] { return nav::NavEnv(corridor(), corridor_env()); };
  const auto a = train(make, cfg), b = train(make, cfg);
  std::ostringstream ca, cb;
  write_curve_csv(ca, a.curves);
  write_curve_csv(cb, b.curves);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.best.policy.params(), b.best.policy.params());
  EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')), "epoch,seed,mean_score,std_score,episodes");
  double best = -1;
  for (const auto& e : a.curves[0].epochs) {
    EXPECT_GE(e.best_score, best);
    best = e.best_score;
    EXPECT_GE(e.mean_score, 0);
    EXPECT_LE(e.mean_score, 1);
  }
  EXPECT_DOUBLE_EQ(a.best.score, best);
}

TEST(Checkpoint, RoundTripAndFingerprint) {
  nav::NavEnv env(corridor(), corridor_env());
  Checkpoint c;
  c.policy = Policy(PolicySpec::for_env(env.config(), {8, 8}), 21);
  c.epoch = 4;
  c.score = 0.75;
  c.seed = 21;
  c.algorithm = "ppo";
  c.env = env.config();
  c.fingerprint = env_fingerprint(c.env);
  const auto path = std::filesystem::temp_directory_path() / "robotiq_ckpt_test.json";
  save_checkpoint(c, path);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.policy.params(), c.policy.params());
  EXPECT_EQ(back.fingerprint, c.fingerprint);
  EXPECT_EQ(back.epoch, 4);
  auto obs = env.reset(0);
  EXPECT_EQ(back.policy.act_deterministic(obs.flat()), c.policy.act_deterministic(obs.flat()));

  auto other = env.config();
  other.n = 181;
  other.delta_deg = 1;
  try {
    require_compatible(back, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIncompatible);
  }
  nav::NavEnv wide(corridor(), other);
  EXPECT_THROW(evaluate(back, wide, 1), Error);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), Error);
}
