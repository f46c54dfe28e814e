#ifndef ROBOTIQ_RL_UPDATE_HPP_
#define ROBOTIQ_RL_UPDATE_HPP_

#include <span>
#include <string>
#include <vector>

#include "robotiq/rl/config.hpp"
#include "robotiq/rl/policy.hpp"
#include "robotiq/rl/rollout.hpp"

namespace robotiq::rl {

class Adam {
 public:
  Adam() = default;
  Adam(int size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // Applies one step to params[begin, end) using grad[begin, end).
  void step(std::span<double> params, std::span<const double> grad, int begin, int end);

  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct OptimizerState {
  Adam actor;
  Adam critic;

  static OptimizerState for_policy(const Policy& policy, const TrainConfig& cfg);
};

struct LossTerms {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Which parts of the objective to include.
struct LossWeights {
  double policy = 1.0;
  double entropy = 0.0;
  double value = 0.5;
};

// Loss over the transitions in `indices` evaluated at `params`:
//   VPG: -mean(logp * A)
//   PPO: -mean(min(ratio * A, clip(ratio, 1-eps, 1+eps) * A))
// minus entropy * mean(H) plus value * 0.5 * mean((V - R)^2). Advantages
// are normalized over `indices` when cfg.normalize_advantages is set. If
// grad is non-empty, the analytic gradient is accumulated into it. At the
// clip boundary the clipped branch is taken (zero gradient).
LossTerms compute_loss(const Policy& policy, std::span<const double> params, const Batch& batch,
                       std::span<const size_t> indices, const TrainConfig& cfg,
                       const LossWeights& weights, std::span<double> grad);

struct UpdateDiagnostics {
  LossTerms loss;          // at the start of the update
  int gradient_steps = 0;
  bool nan_guard = false;  // update aborted, parameters restored
  std::string message;
};

// One epoch's update (VPG: one policy step then value regression; PPO:
// clipped-surrogate minibatch epochs). On a non-finite loss or gradient the
// parameters are restored and nan_guard is set.
UpdateDiagnostics policy_update(Policy& policy, OptimizerState& opt, const Batch& batch,
                                const TrainConfig& cfg, std::uint64_t shuffle_seed);

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_UPDATE_HPP_
