#include "robotiq/rl/mlp.hpp"

#include <cmath>

#include "robotiq/error.hpp"

namespace robotiq::rl {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorKind::kInvalidSpec, "mlp needs at least two layers");
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw Error(ErrorKind::kInvalidSpec, "mlp layer size < 1");
    offsets_.push_back(num_parameters_);
    num_parameters_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
}

void Mlp::initialize(std::span<double> params, std::mt19937_64& rng, double output_gain) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    double scale = 1.0 / std::sqrt(static_cast<double>(in));
    if (l + 2 == sizes_.size()) scale *= output_gain;
    double* w = params.data() + offsets_[l];
    for (int i = 0; i < out * in; ++i) w[i] = scale * normal(rng);
    for (int i = 0; i < out; ++i) w[out * in + i] = 0.0;
  }
}

std::span<const double> Mlp::forward(std::span<const double> params,
                                     std::span<const double> input, MlpWorkspace& ws) const {
  const size_t layers = sizes_.size();
  ws.activations.resize(layers);
  ws.activations[0].assign(input.begin(), input.end());
  for (size_t l = 0; l + 1 < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params.data() + offsets_[l];
    const double* b = w + out * in;
    const auto& x = ws.activations[l];
    auto& y = ws.activations[l + 1];
    y.resize(static_cast<size_t>(out));
    const bool hidden = l + 2 < layers;
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + o * in;
      for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<size_t>(i)];
      y[static_cast<size_t>(o)] = hidden ? std::tanh(acc) : acc;
    }
  }
  return ws.activations.back();
}

void Mlp::backward(std::span<const double> params, MlpWorkspace& ws,
                   std::span<const double> grad_output, std::span<double> grad) const {
  const size_t layers = sizes_.size();
  ws.delta.assign(grad_output.begin(), grad_output.end());
  for (size_t l = layers - 1; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + out * in;
    const auto& x = ws.activations[l];
    for (int o = 0; o < out; ++o) {
      const double d = ws.delta[static_cast<size_t>(o)];
      gb[o] += d;
      double* grow = gw + o * in;
      for (int i = 0; i < in; ++i) grow[i] += d * x[static_cast<size_t>(i)];
    }
    if (l == 0) break;
    // Propagate through the weights and the tanh of layer l.
    ws.next_delta.assign(static_cast<size_t>(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = ws.delta[static_cast<size_t>(o)];
      const double* row = w + o * in;
      for (int i = 0; i < in; ++i) ws.next_delta[static_cast<size_t>(i)] += d * row[i];
    }
    for (int i = 0; i < in; ++i) {
      const double a = x[static_cast<size_t>(i)];
      ws.next_delta[static_cast<size_t>(i)] *= 1.0 - a * a;
    }
    ws.delta.swap(ws.next_delta);
  }
}

}  // namespace robotiq::rl
