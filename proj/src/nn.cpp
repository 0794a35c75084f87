#include "acsim/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "acsim/random.hpp"

namespace acsim::nn {

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  if (sizes.back() != 2) throw std::invalid_argument("Mlp: output layer must have exactly two units");
}

void check_input(const Mlp& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.input_size())
    throw std::invalid_argument("Mlp: input has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(net.input_size()));
}

void affine(const DenseLayer& l, std::span<const double> x, std::vector<double>& z) {
  z.assign(l.b.begin(), l.b.end());
  for (int o = 0; o < l.out; ++o) {
    const double* row = l.w.data() + static_cast<std::ptrdiff_t>(o) * l.in;
    double acc = 0.0;
    for (int i = 0; i < l.in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
    z[static_cast<std::size_t>(o)] += acc;
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  Rng rng(stream_seed(seed, streams::kInit));
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    DenseLayer l(sizes_[k], sizes_[k + 1]);
    const double limit = std::sqrt(6.0 / sizes_[k]);
    std::uniform_real_distribution<double> u(-limit, limit);
    for (auto& w : l.w) w = u(rng);
    layers_.push_back(std::move(l));
  }
}

Mlp Mlp::zeros(std::vector<int> sizes) {
  check_sizes(sizes);
  Mlp net;
  net.sizes_ = std::move(sizes);
  for (std::size_t k = 0; k + 1 < net.sizes_.size(); ++k) net.layers_.emplace_back(net.sizes_[k], net.sizes_[k + 1]);
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  check_input(*this, x);
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    affine(layers_[k], a, z);
    if (k + 1 < layers_.size())
      for (auto& v : z) v = v > 0.0 ? v : 0.0;
    a.swap(z);
  }
  return a;
}

ParameterSet zeros_like(const ParameterSet& p) {
  ParameterSet out;
  out.reserve(p.size());
  for (const auto& l : p) out.emplace_back(l.in, l.out);
  return out;
}

LossAndGrad backward_mse_single(const Mlp& net, std::span<const double> x, int action, double target) {
  check_input(net, x);
  if (action != 0 && action != 1) throw std::invalid_argument("backward_mse_single: action must be 0 or 1");
  const auto& layers = net.layers();
  const std::size_t n = layers.size();

  // Forward pass keeping every activation (acts[0] = input).
  std::vector<std::vector<double>> acts(n + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < n; ++k) {
    affine(layers[k], acts[k], acts[k + 1]);
    if (k + 1 < n)
      for (auto& v : acts[k + 1]) v = v > 0.0 ? v : 0.0;
  }

  LossAndGrad out;
  out.grads = zeros_like(layers);
  const double residual = acts[n][static_cast<std::size_t>(action)] - target;
  out.loss = residual * residual;

  std::vector<double> delta(2, 0.0);
  delta[static_cast<std::size_t>(action)] = 2.0 * residual;
  for (std::size_t k = n; k-- > 0;) {
    const DenseLayer& l = layers[k];
    DenseLayer& g = out.grads[k];
    const auto& input = acts[k];
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      g.b[static_cast<std::size_t>(o)] = d;
      if (d == 0.0) continue;
      double* row = g.w.data() + static_cast<std::ptrdiff_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) row[i] = d * input[static_cast<std::size_t>(i)];
    }
    if (k == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(l.in), 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      const double* row = l.w.data() + static_cast<std::ptrdiff_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
    }
    // ReLU derivative of the hidden layer feeding this one.
    for (int i = 0; i < l.in; ++i)
      if (input[static_cast<std::size_t>(i)] <= 0.0) prev[static_cast<std::size_t>(i)] = 0.0;
    delta.swap(prev);
  }
  return out;
}

AdamState::AdamState(const Mlp& net, double learning_rate)
    : lr(learning_rate), m(zeros_like(net.layers())), v(zeros_like(net.layers())) {}

void adam_step(Mlp& net, AdamState& adam, const ParameterSet& grads) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || adam.m.size() != layers.size())
    throw std::invalid_argument("adam_step: parameter shapes do not match");
  ++adam.step;
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (g.size() != p.size() || m.size() != p.size()) throw std::invalid_argument("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
      v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
    }
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].w, grads[k].w, adam.m[k].w, adam.v[k].w);
    update(layers[k].b, grads[k].b, adam.m[k].b, adam.v[k].b);
  }
}

void copy_parameters(const Mlp& src, Mlp& dst) {
  if (!src.same_shape(dst)) throw std::invalid_argument("copy_parameters: architectures differ");
  dst.layers() = src.layers();
}

namespace {

nlohmann::json layers_to_json(const ParameterSet& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : p) arr.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
  return arr;
}

ParameterSet layers_from_json(const nlohmann::json& arr) {
  ParameterSet p;
  for (const auto& j : arr) {
    DenseLayer l(j.at("in").get<int>(), j.at("out").get<int>());
    l.w = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    if (l.w.size() != static_cast<std::size_t>(l.in * l.out) || l.b.size() != static_cast<std::size_t>(l.out))
      throw std::invalid_argument("checkpoint: layer parameter count does not match its shape");
    p.push_back(std::move(l));
  }
  return p;
}

}  // namespace

nlohmann::json to_json(const Mlp& net) {
  return {{"sizes", net.sizes()}, {"layers", layers_to_json(net.layers())}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net = Mlp::zeros(j.at("sizes").get<std::vector<int>>());
  ParameterSet layers = layers_from_json(j.at("layers"));
  if (layers.size() != net.layers().size()) throw std::invalid_argument("checkpoint: layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k)
    if (layers[k].in != net.layers()[k].in || layers[k].out != net.layers()[k].out)
      throw std::invalid_argument("checkpoint: layer shape mismatch");
  net.layers() = std::move(layers);
  return net;
}

nlohmann::json to_json(const AdamState& adam) {
  return {{"lr", adam.lr},       {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps},
          {"step", adam.step},   {"m", layers_to_json(adam.m)}, {"v", layers_to_json(adam.v)}};
}

AdamState adam_from_json(const nlohmann::json& j) {
  AdamState a;
  a.lr = j.at("lr").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.eps = j.at("eps").get<double>();
  a.step = j.at("step").get<std::int64_t>();
  a.m = layers_from_json(j.at("m"));
  a.v = layers_from_json(j.at("v"));
  return a;
}

}  // namespace acsim::nn
