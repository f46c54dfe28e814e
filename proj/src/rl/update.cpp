#include "robotiq/rl/update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "robotiq/error.hpp"

namespace robotiq::rl {

Adam::Adam(int size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(static_cast<size_t>(size), 0.0), v_(static_cast<size_t>(size), 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, int begin, int end) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (int i = begin; i < end; ++i) {
    const auto k = static_cast<size_t>(i);
    const auto s = static_cast<size_t>(i - begin);
    m_[s] = beta1_ * m_[s] + (1.0 - beta1_) * grad[k];
    v_[s] = beta2_ * v_[s] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr_ * (m_[s] / c1) / (std::sqrt(v_[s] / c2) + eps_);
  }
}

OptimizerState OptimizerState::for_policy(const Policy& policy, const TrainConfig& cfg) {
  return {Adam(policy.actor_end() - policy.actor_begin(), cfg.pi_lr, 0.9, 0.999, 1e-5),
          Adam(policy.critic_end() - policy.critic_begin(), cfg.vf_lr, 0.9, 0.999, 1e-5)};
}

LossTerms compute_loss(const Policy& policy, std::span<const double> params, const Batch& batch,
                       std::span<const size_t> indices, const TrainConfig& cfg,
                       const LossWeights& weights, std::span<double> grad) {
  LossTerms out;
  const size_t m = indices.size();
  if (m == 0) return out;
  const double inv_m = 1.0 / static_cast<double>(m);

  double adv_mean = 0.0, adv_std = 1.0;
  if (cfg.normalize_advantages && m > 1) {
    for (size_t i : indices) adv_mean += batch.advantages[i];
    adv_mean *= inv_m;
    double var = 0.0;
    for (size_t i : indices) var += (batch.advantages[i] - adv_mean) * (batch.advantages[i] - adv_mean);
    adv_std = std::sqrt(var * inv_m) + 1e-8;
  } else {
    adv_mean = 0.0;
  }

  const bool need_actor = weights.policy != 0.0 || weights.entropy != 0.0;
  const bool need_critic = weights.value != 0.0;
  const bool ppo = cfg.algorithm == Algorithm::kPpo;
  const double eps = cfg.clip_ratio;
  const auto actor_params = params.subspan(0, static_cast<size_t>(policy.actor().num_parameters()));
  const auto critic_params = params.subspan(static_cast<size_t>(policy.critic_begin()));
  std::span<double> actor_grad, critic_grad;
  if (!grad.empty()) {
    actor_grad = grad.subspan(0, static_cast<size_t>(policy.actor().num_parameters()));
    critic_grad = grad.subspan(static_cast<size_t>(policy.critic_begin()));
  }

  MlpWorkspace ws;
  std::vector<double> head_grad;
  for (size_t i : indices) {
    const auto x = policy.normalize(batch.observation(i));
    if (need_actor) {
      const DistributionTerms d = policy.distribution(params, x, batch.actions[i], ws);
      const double adv = (batch.advantages[i] - adv_mean) / adv_std;
      double dloss_dlogp = 0.0;
      if (ppo) {
        const double ratio = std::exp(d.logprob - batch.logprobs[i]);
        const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
        out.policy_loss -= std::min(ratio * adv, clipped * adv) * inv_m;
        const bool clip_active = (adv >= 0.0 && ratio >= 1.0 + eps) || (adv < 0.0 && ratio <= 1.0 - eps);
        if (!clip_active) dloss_dlogp = -adv * ratio * inv_m;
        out.approx_kl += (batch.logprobs[i] - d.logprob) * inv_m;
        if (std::abs(ratio - 1.0) > eps) out.clip_fraction += inv_m;
      } else {
        out.policy_loss -= d.logprob * adv * inv_m;
        dloss_dlogp = -adv * inv_m;
      }
      out.entropy += d.entropy * inv_m;
      if (!grad.empty()) {
        head_grad.resize(d.dlogprob_dhead.size());
        const double wp = weights.policy * dloss_dlogp;
        const double we = -weights.entropy * inv_m;
        for (size_t k = 0; k < head_grad.size(); ++k) {
          head_grad[k] = wp * d.dlogprob_dhead[k] + we * d.dentropy_dhead[k];
        }
        policy.actor().backward(actor_params, ws, head_grad, actor_grad);
        if (!policy.discrete()) {
          grad[static_cast<size_t>(policy.log_std_index())] +=
              wp * d.dlogprob_dlogstd + we * d.dentropy_dlogstd;
        }
      }
    }
    if (need_critic) {
      const double v = policy.critic().forward(critic_params, x, ws)[0];
      const double err = v - batch.returns[i];
      out.value_loss += 0.5 * err * err * inv_m;
      if (!grad.empty()) {
        const double g = weights.value * err * inv_m;
        policy.critic().backward(critic_params, ws, std::span(&g, 1), critic_grad);
      }
    }
  }
  out.total = weights.policy * out.policy_loss - weights.entropy * out.entropy +
              weights.value * out.value_loss;
  return out;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void clip_norm(std::span<double> g, int begin, int end, double max_norm) {
  if (!(max_norm > 0.0)) return;
  double n2 = 0.0;
  for (int i = begin; i < end; ++i) n2 += g[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
  const double n = std::sqrt(n2);
  if (n > max_norm) {
    const double s = max_norm / n;
    for (int i = begin; i < end; ++i) g[static_cast<size_t>(i)] *= s;
  }
}

}  // namespace

UpdateDiagnostics policy_update(Policy& policy, OptimizerState& opt, const Batch& batch,
                                const TrainConfig& cfg, std::uint64_t shuffle_seed) {
  UpdateDiagnostics diag;
  const std::vector<double> saved = policy.params();
  auto& params = policy.params();
  std::vector<double> grad(params.size());
  std::vector<size_t> all(batch.size());
  std::iota(all.begin(), all.end(), size_t{0});

  const auto guard = [&](const LossTerms& l) {
    if (std::isfinite(l.total) && all_finite(grad)) return false;
    params = saved;
    diag.nan_guard = true;
    diag.message = "non-finite loss or gradient; update aborted";
    return true;
  };

  const LossWeights full{1.0, cfg.ent_coef, cfg.vf_coef};
  diag.loss = compute_loss(policy, params, batch, all, cfg, full, {});
  if (!std::isfinite(diag.loss.total)) {
    diag.nan_guard = true;
    diag.message = "non-finite loss; update aborted";
    return diag;
  }

  if (cfg.algorithm == Algorithm::kPpo) {
    std::mt19937_64 rng(shuffle_seed);
    const size_t mb = std::max<size_t>(1, static_cast<size_t>(cfg.minibatch_size));
    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
      std::shuffle(all.begin(), all.end(), rng);
      bool stop = false;
      for (size_t start = 0; start < all.size(); start += mb) {
        const auto idx = std::span(all).subspan(start, std::min(mb, all.size() - start));
        std::fill(grad.begin(), grad.end(), 0.0);
        const LossTerms l = compute_loss(policy, params, batch, idx, cfg, full, grad);
        if (guard(l)) return diag;
        if (cfg.target_kl > 0.0 && l.approx_kl > 1.5 * cfg.target_kl) {
          stop = true;
          break;
        }
        clip_norm(grad, policy.actor_begin(), policy.actor_end(), cfg.max_grad_norm);
        clip_norm(grad, policy.critic_begin(), policy.critic_end(), cfg.max_grad_norm);
        opt.actor.step(params, grad, policy.actor_begin(), policy.actor_end());
        opt.critic.step(params, grad, policy.critic_begin(), policy.critic_end());
        ++diag.gradient_steps;
      }
      if (stop) break;
    }
  } else {
    std::fill(grad.begin(), grad.end(), 0.0);
    const LossTerms l = compute_loss(policy, params, batch, all, cfg, {1.0, cfg.ent_coef, 0.0}, grad);
    if (guard(l)) return diag;
    clip_norm(grad, policy.actor_begin(), policy.actor_end(), cfg.max_grad_norm);
    opt.actor.step(params, grad, policy.actor_begin(), policy.actor_end());
    ++diag.gradient_steps;
    for (int it = 0; it < cfg.vf_iters; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      const LossTerms lv = compute_loss(policy, params, batch, all, cfg, {0.0, 0.0, 1.0}, grad);
      if (guard(lv)) return diag;
      opt.critic.step(params, grad, policy.critic_begin(), policy.critic_end());
      ++diag.gradient_steps;
    }
  }
  if (!all_finite(params)) {
    params = saved;
    diag.nan_guard = true;
    diag.message = "non-finite parameters after update; restored";
  }
  return diag;
}

}  // namespace robotiq::rl
