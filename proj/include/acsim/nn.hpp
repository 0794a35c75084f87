#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace acsim::nn {

/// Dense layer with row-major weights: w[o * in + i].
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  DenseLayer() = default;
  DenseLayer(int in_size, int out_size)
      : in(in_size), out(out_size), w(static_cast<std::size_t>(in_size * out_size)), b(static_cast<std::size_t>(out_size)) {}

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Same shapes as an Mlp's layers; used for gradients and Adam moments.
using ParameterSet = std::vector<DenseLayer>;

/// Feed-forward network with ReLU hidden layers and a linear output of two
/// Q values (index 0 = block, 1 = accept).
class Mlp {
 public:
  Mlp() = default;
  /// `sizes` = {input, hidden..., 2}. Weights are drawn U(-√(6/fan_in), √(6/fan_in))
  /// from `seed`; biases start at zero.
  Mlp(std::vector<int> sizes, std::uint64_t seed);

  /// All parameters zero.
  static Mlp zeros(std::vector<int> sizes);

  std::vector<double> forward(std::span<const double> x) const;

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  const ParameterSet& layers() const { return layers_; }
  ParameterSet& layers() { return layers_; }

  bool same_shape(const Mlp& other) const { return sizes_ == other.sizes_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<int> sizes_;
  ParameterSet layers_;
};

struct LossAndGrad {
  double loss = 0.0;
  ParameterSet grads;
};

/// Squared error (target - Q[action])² with the gradient flowing only through
/// the selected output.
LossAndGrad backward_mse_single(const Mlp& net, std::span<const double> x, int action, double target);

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  ParameterSet m;
  ParameterSet v;

  AdamState() = default;
  explicit AdamState(const Mlp& net, double learning_rate = 1e-4);

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

void adam_step(Mlp& net, AdamState& adam, const ParameterSet& grads);

/// Copies weights and biases; throws std::invalid_argument on shape mismatch.
void copy_parameters(const Mlp& src, Mlp& dst);

ParameterSet zeros_like(const ParameterSet& p);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdamState& adam);
AdamState adam_from_json(const nlohmann::json& j);

}  // namespace acsim::nn
