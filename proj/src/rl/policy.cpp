#include "robotiq/rl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robotiq/error.hpp"

namespace robotiq::rl {

using nlohmann::json;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

std::vector<int> layers(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

void log_softmax(std::span<const double> logits, std::vector<double>& out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  const double lse = m + std::log(z);
  out.resize(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

}  // namespace

PolicySpec PolicySpec::for_env(const nav::EnvConfig& cfg, std::vector<int> hidden) {
  PolicySpec s;
  s.obs_dim = cfg.n + 2;
  s.hidden = std::move(hidden);
  s.actions = cfg.actions;
  s.obs_scale.assign(static_cast<size_t>(cfg.n), cfg.r_max);
  s.obs_scale.push_back(std::numbers::pi);
  s.obs_scale.push_back(cfg.d_max > 0.0 ? cfg.d_max : 1.0);
  return s;
}

Policy::Policy(PolicySpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  if (spec_.obs_dim < 1) throw Error(ErrorKind::kInvalidSpec, "policy obs_dim must be >= 1");
  if (spec_.obs_scale.empty()) spec_.obs_scale.assign(static_cast<size_t>(spec_.obs_dim), 1.0);
  if (static_cast<int>(spec_.obs_scale.size()) != spec_.obs_dim) {
    throw Error(ErrorKind::kInvalidSpec, "policy obs_scale width does not match obs_dim");
  }
  actor_ = Mlp(layers(spec_.obs_dim, spec_.hidden, action_count()));
  critic_ = Mlp(layers(spec_.obs_dim, spec_.hidden, 1));
  params_.assign(static_cast<size_t>(actor_.num_parameters() + (discrete() ? 0 : 1) +
                                     critic_.num_parameters()),
                 0.0);
  std::mt19937_64 rng(seed);
  actor_.initialize(std::span(params_).subspan(0, static_cast<size_t>(actor_.num_parameters())), rng,
                    0.01);
  if (!discrete()) params_[static_cast<size_t>(log_std_index())] = spec_.init_log_std;
  critic_.initialize(std::span(params_).subspan(static_cast<size_t>(critic_begin())), rng, 1.0);
}

int Policy::action_count() const {
  if (const auto* d = std::get_if<nav::DiscreteActions>(&spec_.actions)) return d->count;
  return 1;
}

std::vector<double> Policy::normalize(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != spec_.obs_dim) {
    throw Error(ErrorKind::kIncompatible, "observation width " + std::to_string(obs.size()) +
                                              " does not match policy input " +
                                              std::to_string(spec_.obs_dim));
  }
  std::vector<double> out(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) out[i] = obs[i] / spec_.obs_scale[i];
  return out;
}

nav::Action Policy::to_env_action(double raw) const {
  if (discrete()) return static_cast<int>(raw);
  const auto& c = std::get<nav::ContinuousActions>(spec_.actions);
  const double mid = 0.5 * (c.omega_max + c.omega_min);
  const double half = 0.5 * (c.omega_max - c.omega_min);
  return mid + half * std::tanh(raw);
}

ActionSample Policy::sample(std::span<const double> obs, std::mt19937_64& rng) const {
  const auto x = normalize(obs);
  MlpWorkspace ws;
  const auto head = actor_.forward(std::span(params_).subspan(0, actor_.num_parameters()), x, ws);
  ActionSample s;
  if (discrete()) {
    std::vector<double> logp;
    log_softmax(head, logp);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    int pick = static_cast<int>(logp.size()) - 1;
    for (size_t i = 0; i < logp.size(); ++i) {
      acc += std::exp(logp[i]);
      if (u < acc) {
        pick = static_cast<int>(i);
        break;
      }
    }
    s.raw = pick;
    s.logprob = logp[static_cast<size_t>(pick)];
  } else {
    const double mean = head[0];
    const double log_std = params_[static_cast<size_t>(log_std_index())];
    std::normal_distribution<double> normal(0.0, 1.0);
    const double eps = normal(rng);
    s.raw = mean + std::exp(log_std) * eps;
    s.logprob = -0.5 * eps * eps - log_std - kHalfLog2Pi;
  }
  s.action = to_env_action(s.raw);
  s.value = value(obs);
  return s;
}

nav::Action Policy::act_deterministic(std::span<const double> obs) const {
  const auto x = normalize(obs);
  MlpWorkspace ws;
  const auto head = actor_.forward(std::span(params_).subspan(0, actor_.num_parameters()), x, ws);
  if (discrete()) {
    return static_cast<int>(std::max_element(head.begin(), head.end()) - head.begin());
  }
  return to_env_action(head[0]);
}

double Policy::value(std::span<const double> obs) const {
  const auto x = normalize(obs);
  MlpWorkspace ws;
  return critic_.forward(std::span(params_).subspan(static_cast<size_t>(critic_begin())), x, ws)[0];
}

DistributionTerms Policy::distribution(std::span<const double> params,
                                       std::span<const double> norm_obs, double raw,
                                       MlpWorkspace& ws) const {
  const auto head = actor_.forward(params.subspan(0, actor_.num_parameters()), norm_obs, ws);
  DistributionTerms t;
  if (discrete()) {
    std::vector<double> logp;
    log_softmax(head, logp);
    const auto a = static_cast<size_t>(raw);
    t.logprob = logp[a];
    const size_t k = logp.size();
    t.dlogprob_dhead.resize(k);
    t.dentropy_dhead.resize(k);
    for (size_t i = 0; i < k; ++i) {
      const double p = std::exp(logp[i]);
      t.entropy -= p * logp[i];
      t.dlogprob_dhead[i] = (i == a ? 1.0 : 0.0) - p;
    }
    // dH/dl_j = -p_j (log p_j + H)
    for (size_t i = 0; i < k; ++i) {
      t.dentropy_dhead[i] = -std::exp(logp[i]) * (logp[i] + t.entropy);
    }
  } else {
    const double mean = head[0];
    const double log_std = params[static_cast<size_t>(log_std_index())];
    const double inv_var = std::exp(-2.0 * log_std);
    const double diff = raw - mean;
    t.logprob = -0.5 * diff * diff * inv_var - log_std - kHalfLog2Pi;
    t.entropy = log_std + 0.5 + kHalfLog2Pi;
    t.dlogprob_dhead = {diff * inv_var};
    t.dentropy_dhead = {0.0};
    t.dlogprob_dlogstd = diff * diff * inv_var - 1.0;
    t.dentropy_dlogstd = 1.0;
  }
  return t;
}

json Policy::to_json() const {
  json actions;
  if (const auto* d = std::get_if<nav::DiscreteActions>(&spec_.actions)) {
    actions = {{"type", "discrete"}, {"count", d->count}, {"omega_max", d->omega_max}};
  } else {
    const auto& c = std::get<nav::ContinuousActions>(spec_.actions);
    actions = {{"type", "continuous"}, {"omega_min", c.omega_min}, {"omega_max", c.omega_max}};
  }
  return {{"obs_dim", spec_.obs_dim},
          {"hidden", spec_.hidden},
          {"actions", actions},
          {"obs_scale", spec_.obs_scale},
          {"init_log_std", spec_.init_log_std},
          {"params", params_}};
}

Policy Policy::from_json(const json& j) {
  PolicySpec spec;
  spec.obs_dim = j.at("obs_dim").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.obs_scale = j.at("obs_scale").get<std::vector<double>>();
  spec.init_log_std = j.value("init_log_std", spec.init_log_std);
  const json& a = j.at("actions");
  if (a.at("type") == "discrete") {
    spec.actions = nav::DiscreteActions{a.at("count").get<int>(), a.at("omega_max").get<double>()};
  } else {
    spec.actions =
        nav::ContinuousActions{a.at("omega_min").get<double>(), a.at("omega_max").get<double>()};
  }
  Policy p(spec, 0);
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != p.params_.size()) {
    throw Error(ErrorKind::kParse, "checkpoint parameter count mismatch");
  }
  p.params_ = std::move(params);
  return p;
}

}  // namespace robotiq::rl
