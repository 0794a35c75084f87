#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "acsim/nn.hpp"
#include "acsim/qlearning.hpp"

namespace acsim::rl {

struct DqlConfig {
  std::vector<int> hidden{64, 64};
  double learning_rate = 1e-4;
  /// Per-second discount used when bootstrapping from the next decision.
  double gamma = 0.9;
  std::int64_t target_period = 500;
  /// Rewards are multiplied by this before entering the loss.
  double reward_scale = 0.1;
  /// Elementwise input scaling; empty means all ones.
  std::vector<double> input_scale;
  std::uint64_t seed = 1;
};

/// Completed transition over raw feature vectors.
struct Transition {
  std::vector<double> state;
  int action = 1;
  double reward = 0.0;
  double dt = 0.0;
  std::optional<std::vector<double>> next;
};

/// Prediction/target network pair trained online with Adam.
class DqlAgent {
 public:
  DqlAgent(int input_size, DqlConfig config);
  DqlAgent(nn::Mlp prediction, nn::Mlp target, nn::AdamState adam, DqlConfig config, std::int64_t updates);

  std::array<double, 2> q_values(std::span<const double> features) const;
  std::array<double, 2> target_q_values(std::span<const double> features) const;

  /// One Adam step on (target − Q_pnn(s)[a])² with target r + γ^Δt·max Q_tnn(s').
  /// Every `target_period` updates the target network is refreshed. Returns the loss.
  double update(const Transition& tr);

  const nn::Mlp& prediction() const { return pnn_; }
  nn::Mlp& prediction() { return pnn_; }
  const nn::Mlp& target() const { return tnn_; }
  const nn::AdamState& adam() const { return adam_; }
  const DqlConfig& config() const { return config_; }
  std::int64_t updates() const { return updates_; }
  int input_size() const { return pnn_.input_size(); }

 private:
  std::vector<double> scaled(std::span<const double> features) const;

  DqlConfig config_;
  nn::Mlp pnn_;
  nn::Mlp tnn_;
  nn::AdamState adam_;
  std::int64_t updates_ = 0;
};

/// Forward through the prediction network and pick ε-greedily (ties accept).
Decision dql_decide(const DqlAgent& agent, std::span<const double> features, double epsilon, Rng& rng);

}  // namespace acsim::rl
