#ifndef ROBOTIQ_RL_MLP_HPP_
#define ROBOTIQ_RL_MLP_HPP_

#include <random>
#include <span>
#include <vector>

namespace robotiq::rl {

// Cached activations of one forward pass, reused by backward().
struct MlpWorkspace {
  std::vector<std::vector<double>> activations;  // [0] = input, back() = output
  std::vector<double> delta;
  std::vector<double> next_delta;
};

// Fully connected network with tanh hidden layers and a linear output. The
// parameters live outside the object, laid out per layer as a row-major
// weight matrix (out x in) followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  int num_parameters() const { return num_parameters_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  // Gaussian init scaled by 1/sqrt(fan_in); the last layer is further scaled
  // by output_gain.
  void initialize(std::span<double> params, std::mt19937_64& rng, double output_gain) const;

  std::span<const double> forward(std::span<const double> params, std::span<const double> input,
                                  MlpWorkspace& ws) const;

  // Accumulates d(loss)/d(params) into grad given d(loss)/d(output) for the
  // pass cached in ws.
  void backward(std::span<const double> params, MlpWorkspace& ws,
                std::span<const double> grad_output, std::span<double> grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // start of each layer's weights
  int num_parameters_ = 0;
};

}  // namespace robotiq::rl

#endif  // ROBOTIQ_RL_MLP_HPP_
