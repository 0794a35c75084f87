#include "acsim/dql.hpp"

#include <cmath>
#include <stdexcept>

namespace acsim::rl {

namespace {

std::vector<int> layer_sizes(int input_size, const std::vector<int>& hidden) {
  std::vector<int> s{input_size};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(2);
  return s;
}

}  // namespace

DqlAgent::DqlAgent(int input_size, DqlConfig config)
    : config_(std::move(config)), pnn_(layer_sizes(input_size, config_.hidden), config_.seed), tnn_(pnn_),
      adam_(pnn_, config_.learning_rate) {
  if (!config_.input_scale.empty() && static_cast<int>(config_.input_scale.size()) != input_size)
    throw std::invalid_argument("DqlAgent: input_scale length must match the input size");
  if (config_.target_period < 1) throw std::invalid_argument("DqlAgent: target period must be positive");
}

DqlAgent::DqlAgent(nn::Mlp prediction, nn::Mlp target, nn::AdamState adam, DqlConfig config, std::int64_t updates)
    : config_(std::move(config)), pnn_(std::move(prediction)), tnn_(std::move(target)), adam_(std::move(adam)),
      updates_(updates) {
  if (!pnn_.same_shape(tnn_)) throw std::invalid_argument("DqlAgent: prediction and target shapes differ");
}

std::vector<double> DqlAgent::scaled(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != pnn_.input_size())
    throw std::invalid_argument("DqlAgent: feature vector has " + std::to_string(features.size()) +
                                " entries, network expects " + std::to_string(pnn_.input_size()));
  std::vector<double> x(features.begin(), features.end());
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("DqlAgent: non-finite feature value");
  if (!config_.input_scale.empty())
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= config_.input_scale[i];
  return x;
}

std::array<double, 2> DqlAgent::q_values(std::span<const double> features) const {
  const auto q = pnn_.forward(scaled(features));
  return {q[0], q[1]};
}

std::array<double, 2> DqlAgent::target_q_values(std::span<const double> features) const {
  const auto q = tnn_.forward(scaled(features));
  return {q[0], q[1]};
}

double DqlAgent::update(const Transition& tr) {
  double y = config_.reward_scale * tr.reward;
  if (tr.next) {
    const auto q_next = target_q_values(*tr.next);
    y += std::pow(config_.gamma, tr.dt) * std::max(q_next[0], q_next[1]);
  }
  const auto grad = nn::backward_mse_single(pnn_, scaled(tr.state), tr.action, y);
  if (!std::isfinite(grad.loss)) throw std::runtime_error("DqlAgent: loss diverged (non-finite)");
  if (grad.loss != 0.0) nn::adam_step(pnn_, adam_, grad.grads);
  ++updates_;
  if (updates_ % config_.target_period == 0) nn::copy_parameters(pnn_, tnn_);
  return grad.loss;
}

Decision dql_decide(const DqlAgent& agent, std::span<const double> features, double epsilon, Rng& rng) {
  return epsilon_greedy(agent.q_values(features), epsilon, rng);
}

}  // namespace acsim::rl
