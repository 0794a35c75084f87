#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acsim/nn.hpp"
#include "acsim/random.hpp"

using namespace acsim;
using namespace acsim::nn;

namespace {

double loss_at(const Mlp& net, const std::vector<double>& x, int action, double target) {
  const double q = net.forward(x)[static_cast<std::size_t>(action)];
  return (target - q) * (target - q);
}

// Max-norm relative error between the analytic gradient and central differences.
double gradient_error(Mlp net, const std::vector<double>& x, int action, double target, double h = 1e-5) {
  const auto analytic = backward_mse_single(net, x, action, target).grads;
  double diff = 0.0, scale = 1e-8;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto probe = [&](double& p, double g) {
      const double keep = p;
      p = keep + h;
      const double up = loss_at(net, x, action, target);
      p = keep - h;
      const double down = loss_at(net, x, action, target);
      p = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff = std::max(diff, std::abs(numeric - g));
      scale = std::max({scale, std::abs(numeric), std::abs(g)});
    };
    auto& layer = net.layers()[l];
    for (std::size_t i = 0; i < layer.w.size(); ++i) probe(layer.w[i], analytic[l].w[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i) probe(layer.b[i], analytic[l].b[i]);
  }
  return diff / scale;
}

}  // namespace

TEST_CASE("forward examples") {
  const Mlp z = Mlp::zeros({3, 4, 2});
  CHECK(z.forward(std::vector<double>{1.0, 2.0, 3.0}) == std::vector<double>{0.0, 0.0});

  Mlp id = Mlp::zeros({2, 2});
  id.layers()[0].w = {1.0, 0.0, 0.0, 1.0};
  CHECK(id.forward(std::vector<double>{3.0, -1.0}) == std::vector<double>{3.0, -1.0});

  Mlp h = Mlp::zeros({2, 2, 2});
  h.layers()[0].w = {1.0, -2.0, 0.5, 1.5};
  h.layers()[0].b = {0.25, -1.0};
  h.layers()[1].w = {2.0, -1.0, 0.5, 3.0};
  h.layers()[1].b = {0.1, -0.2};
  const double x0 = 0.7, x1 = -0.4;
  const double a0 = std::max(0.0, 1.0 * x0 - 2.0 * x1 + 0.25);
  const double a1 = std::max(0.0, 0.5 * x0 + 1.5 * x1 - 1.0);
  const auto y = h.forward(std::vector<double>{x0, x1});
  CHECK(std::abs(y[0] - (2.0 * a0 - 1.0 * a1 + 0.1)) < 1e-12);
  CHECK(std::abs(y[1] - (0.5 * a0 + 3.0 * a1 - 0.2)) < 1e-12);
  CHECK_THROWS_AS(h.forward(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("initialization is seeded and fan-in scaled") {
  const Mlp a({5, 64, 64, 2}, 3), b({5, 64, 64, 2}, 3), c({5, 64, 64, 2}, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (const auto& l : a.layers()) {
    const double bound = std::sqrt(6.0 / l.in);
    for (double w : l.w) CHECK(std::abs(w) <= bound);
    for (double v : l.b) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(Mlp({5, 64, 3}, 1), std::invalid_argument);
}

TEST_CASE("loss and gradient at the current output are zero") {
  const Mlp net({4, 8, 8, 2}, 2);
  const std::vector<double> x{0.1, 0.5, -0.3, 0.9};
  const double q = net.forward(x)[1];
  const auto lg = backward_mse_single(net, x, 1, q);
  CHECK(lg.loss == 0.0);
  for (const auto& l : lg.grads) {
    for (double g : l.w) CHECK(g == 0.0);
    for (double g : l.b) CHECK(g == 0.0);
  }
}

TEST_CASE("the non-selected output receives no direct gradient") {
  const Mlp net({3, 6, 2}, 5);
  const std::vector<double> x{0.2, -0.1, 0.4};
  const auto lg = backward_mse_single(net, x, 0, 2.0);
  CHECK(lg.grads.back().b[1] == 0.0);
  CHECK(lg.grads.back().b[0] != 0.0);
  for (int i = 0; i < 6; ++i) CHECK(lg.grads.back().w[static_cast<std::size_t>(6 + i)] == 0.0);
  CHECK_THROWS_AS(backward_mse_single(net, x, 2, 0.0), std::invalid_argument);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> width(2, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const int in = width(rng);
    Mlp net({in, width(rng), width(rng), 2}, static_cast<std::uint64_t>(trial));
    // Nonzero biases keep pre-activations off the ReLU kink at exactly zero.
    for (auto& l : net.layers())
      for (double& b : l.b) b = 0.5 * u(rng);
    std::vector<double> x(static_cast<std::size_t>(in));
    for (double& v : x) v = u(rng);
    CHECK(gradient_error(net, x, trial % 2, 3.0 * u(rng)) < 1e-4);
  }
}

TEST_CASE("adam step examples") {
  Mlp net({3, 4, 2}, 9);
  AdamState adam(net, 1e-4);
  const Mlp before = net;
  adam_step(net, adam, zeros_like(net.layers()));
  CHECK(net == before);

  const std::vector<double> x{0.3, 0.6, -0.2};
  const auto lg = backward_mse_single(net, x, 1, 5.0);
  Mlp stepped = net;
  AdamState fresh(stepped, 1e-4);
  adam_step(stepped, fresh, lg.grads);
  CHECK(fresh.step == 1);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (std::size_t i = 0; i < net.layers()[l].w.size(); ++i) {
      const double g = lg.grads[l].w[i];
      const double delta = stepped.layers()[l].w[i] - net.layers()[l].w[i];
      if (std::abs(g) > 1e-6)
        CHECK(delta == doctest::Approx(-1e-4 * (g > 0 ? 1.0 : -1.0)).epsilon(1e-3));
      else
        CHECK(std::abs(delta) <= 1e-4);
    }
  }
}

TEST_CASE("adam minimizes a one-parameter quadratic") {
  Mlp net = Mlp::zeros({1, 2});
  AdamState adam(net, 1e-4);
  const std::vector<double> x{0.0};  // only the accept bias matters
  for (int i = 0; i < 10000; ++i) adam_step(net, adam, backward_mse_single(net, x, 1, 0.5).grads);
  CHECK(std::abs(net.layers()[0].b[1] - 0.5) < 1e-3);
}

TEST_CASE("parameter copies are deep and shape-checked") {
  const Mlp src({3, 5, 2}, 1);
  Mlp dst({3, 5, 2}, 2);
  copy_parameters(src, dst);
  CHECK(dst == src);
  const std::vector<double> x{0.1, 0.2, 0.3};
  CHECK(dst.forward(x) == src.forward(x));
  Mlp src2 = src;
  src2.layers()[0].w[0] += 1.0;
  CHECK(dst == src);
  Mlp other({3, 6, 2}, 1);
  CHECK_THROWS_AS(copy_parameters(src, other), std::invalid_argument);
}

TEST_CASE("outputs stay finite for bounded inputs") {
  const Mlp net({10, 64, 64, 2}, 8);
  Rng rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> x(10);
  for (int i = 0; i < 100000; ++i) {
    for (double& v : x) v = u(rng);
    const auto y = net.forward(x);
    REQUIRE(std::isfinite(y[0]));
    REQUIRE(std::isfinite(y[1]));
  }
}

TEST_CASE("json round trip is exact") {
  Mlp net({4, 7, 2}, 12);
  AdamState adam(net, 3e-4);
  const std::vector<double> x{0.5, -0.5, 0.25, 1.0};
  for (int i = 0; i < 5; ++i) adam_step(net, adam, backward_mse_single(net, x, 0, 1.0).grads);
  CHECK(mlp_from_json(nlohmann::json::parse(to_json(net).dump())) == net);
  CHECK(adam_from_json(nlohmann::json::parse(to_json(adam).dump())) == adam);
}
