#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "acsim/dql.hpp"
#include "acsim/engine.hpp"
#include "acsim/features.hpp"
#include "acsim/qlearning.hpp"
#include "acsim/rl_policy.hpp"

using namespace acsim;
using namespace acsim::rl;

namespace {

sim::Scenario scenario(double mean_interarrival) {
  sim::Scenario s;
  s.arrivals.mean_rate = 1.0 / mean_interarrival;
  return s;
}

RlPolicy::Options options(bool training) {
  RlPolicy::Options o;
  o.feature_version = 2;
  o.num_types = 1;
  o.epsilon = {1.0, 0.05, 400};
  o.training = training;
  o.seed = 3;
  return o;
}

RlPolicy make_ql(bool training) {
  return RlPolicy(options(training), Quantizer::for_features(2, 1, {0.1}), QTable(0.1, 0.9));
}

RlPolicy make_dql(bool training, std::uint64_t seed = 5) {
  DqlConfig c;
  c.seed = seed;
  return RlPolicy(options(training), DqlAgent(policy::feature_length(2, 1), c));
}

policy::Resolution resolution(policy::Resolution::Kind kind, int type, double time, double accept_time) {
  policy::Resolution r;
  r.kind = kind;
  r.ue_type = type;
  r.time = time;
  r.accept_time = accept_time;
  return r;
}

}  // namespace

TEST_CASE("ql update examples") {
  QTable t(0.1, 0.9);
  const double td = ql_update(t, {7, 1, 10.0, 3.3, std::optional<std::uint64_t>(8)});
  CHECK(td == doctest::Approx(10.0));
  CHECK(t.get(7, 1) == doctest::Approx(1.0));
  CHECK(t.get(7, 0) == 0.0);

  QTable full(1.0, 0.9);
  full.set(4, 1, 55.0);
  ql_update(full, {4, 1, -7.5, 2.0, std::optional<std::uint64_t>(9)});
  CHECK(full.get(4, 1) == -7.5);

  sim::RewardSchedule r;
  r.gamma = 1.0;
  CHECK(r.accept_outcome(0, true, 12.0) == -90.0);
  CHECK_THROWS_AS(ql_update(t, {1, 2, 0.0, 0.0, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(ql_update(t, {1, 1, 0.0, -1.0, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(QTable(1.5, 0.9), std::invalid_argument);
}

TEST_CASE("ql update with zero learning rate is the identity") {
  QTable t(0.0, 0.9);
  t.set(2, 0, 3.0);
  t.set(5, 1, -1.0);
  const auto before = t.entries();
  ql_update(t, {2, 0, 100.0, 1.0, std::optional<std::uint64_t>(5)});
  ql_update(t, {5, 1, -4.0, 0.0, std::nullopt});
  CHECK(t.entries() == before);
}

TEST_CASE("repeated ql updates contract geometrically to the fixed point") {
  const double alpha = 0.2, gamma = 0.9, dt = 2.5, r = 4.0;
  QTable t(alpha, gamma);
  t.set(9, 0, 2.0);
  t.set(9, 1, 6.0);  // successor max
  const double fixed = r + std::pow(gamma, dt) * 6.0;
  double err = std::abs(t.get(1, 1) - fixed);
  for (int k = 0; k < 100; ++k) {
    ql_update(t, {1, 1, r, dt, std::optional<std::uint64_t>(9)});
    const double next = std::abs(t.get(1, 1) - fixed);
    if (next < 1e-12) break;
    CHECK(next / err == doctest::Approx(1.0 - alpha).epsilon(1e-6));
    err = next;
  }
  CHECK(t.get(1, 1) == doctest::Approx(fixed).epsilon(1e-9));
}

TEST_CASE("greedy decisions and exploration") {
  Rng rng(1);
  QTable t;
  CHECK(ql_decide(t, 3, 0.0, rng) == Decision::Accept);
  t.set(3, 1, 1.0);
  CHECK(ql_decide(t, 3, 0.0, rng) == Decision::Accept);
  t.set(3, 0, 2.0);
  CHECK(ql_decide(t, 3, 0.0, rng) == Decision::Block);
  int accepts = 0;
  for (int i = 0; i < 10000; ++i) accepts += ql_decide(t, 3, 1.0, rng) == Decision::Accept;
  CHECK(std::abs(accepts / 1e4 - 0.5) < 0.02);
  CHECK(epsilon_greedy({1.0, 1.0}, 0.0, rng) == Decision::Accept);
}

TEST_CASE("epsilon schedule decays linearly then holds") {
  const EpsilonSchedule e{1.0, 0.05, 100};
  CHECK(e.value(0) == 1.0);
  CHECK(e.value(50) == doctest::Approx(0.525));
  CHECK(e.value(100) == 0.05);
  CHECK(e.value(10000) == 0.05);
  CHECK(EpsilonSchedule{1.0, 0.05, 0}.value(0) == 0.05);
}

TEST_CASE("quantizer bins") {
  const BinSpec uniform{0.0, 1.0, 10, {}};
  CHECK(uniform.index(0.0) == 0);
  CHECK(uniform.index(0.05) == 0);
  CHECK(uniform.index(0.15) == 1);
  CHECK(uniform.index(0.999) == 9);
  CHECK(uniform.index(-3.0) == 0);
  CHECK(uniform.index(7.0) == 9);
  const BinSpec grid{0.0, 0.0, 0, {0.05, 0.1, 0.2}};
  CHECK(grid.index(0.06) == 0);
  CHECK(grid.index(0.09) == 1);
  CHECK(grid.index(5.0) == 2);
  CHECK_THROWS_AS(uniform.index(std::nan("")), std::invalid_argument);

  const Quantizer q({uniform, grid});
  CHECK(q.key(std::vector<double>{0.35, 0.2}) == 3u * 3u + 2u);
  CHECK(q.key(std::vector<double>{0.31, 0.19}) == q.key(std::vector<double>{0.39, 0.21}));
  CHECK_THROWS_AS(q.key(std::vector<double>{0.1}), std::invalid_argument);
  CHECK(quantizer_from_json(to_json(q)) == q);
  CHECK(Quantizer::for_features(2, 1, {0.1, 0.2}).size() == static_cast<std::size_t>(policy::feature_length(2, 1)));
}

TEST_CASE("dql decisions") {
  const int n = policy::feature_length(2, 1);
  const std::vector<double> x(static_cast<std::size_t>(n), 0.3);
  Rng rng(2);
  DqlConfig c;
  const auto z = nn::Mlp::zeros({n, 64, 64, 2});
  DqlAgent zero(z, z, nn::AdamState(z, c.learning_rate), c, 0);
  CHECK(dql_decide(zero, x, 0.0, rng) == Decision::Accept);

  DqlAgent blocker(z, z, nn::AdamState(z, c.learning_rate), c, 0);
  blocker.prediction().layers().back().b[0] = 1.0;
  CHECK(dql_decide(blocker, x, 0.0, rng) == Decision::Block);

  DqlAgent agent(n, c);
  CHECK(dql_decide(agent, x, 0.0, rng) == dql_decide(agent, x, 0.0, rng));
  CHECK_THROWS_AS(dql_decide(agent, std::vector<double>{1.0}, 0.0, rng), std::invalid_argument);
}

TEST_CASE("dql argmax ignores a common shift of the output biases") {
  const int n = policy::feature_length(2, 1);
  DqlConfig c;
  DqlAgent a(n, c);
  DqlAgent b = a;
  for (double& v : b.prediction().layers().back().b) v += 3.75;
  Rng rng(4), ra(0), rb(0);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < 2000; ++i) {
    for (double& v : x) v = u(rng);
    CHECK(dql_decide(a, x, 0.0, ra) == dql_decide(b, x, 0.0, rb));
  }
}

TEST_CASE("dql update at the current value leaves parameters unchanged") {
  const int n = policy::feature_length(2, 1);
  DqlConfig c;
  DqlAgent agent(n, c);
  const std::vector<double> x(static_cast<std::size_t>(n), 0.4);
  const double q = agent.q_values(x)[1];
  const nn::Mlp before = agent.prediction();
  const double loss = agent.update({x, 1, q / c.reward_scale, 0.0, std::nullopt});
  CHECK(loss < 1e-24);
  for (std::size_t l = 0; l < before.layers().size(); ++l) {
    for (std::size_t i = 0; i < before.layers()[l].w.size(); ++i)
      CHECK(std::abs(agent.prediction().layers()[l].w[i] - before.layers()[l].w[i]) <= 1e-12);
  }
}

TEST_CASE("repeated dql updates on one sample reduce the loss") {
  const int n = policy::feature_length(2, 1);
  DqlAgent agent(n, DqlConfig{});
  const Transition tr{std::vector<double>(static_cast<std::size_t>(n), 0.5), 0, 10.0, 0.0, std::nullopt};
  double prev = agent.update(tr);
  for (int i = 0; i < 50; ++i) {
    const double loss = agent.update(tr);
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("target network is refreshed every C updates") {
  const int n = policy::feature_length(2, 1);
  DqlConfig c;
  c.target_period = 5;
  DqlAgent agent(n, c);
  const nn::Mlp initial = agent.target();
  CHECK(initial == agent.prediction());
  const std::vector<double> x(static_cast<std::size_t>(n), 0.2);
  for (int i = 0; i < 4; ++i) agent.update({x, 1, 10.0, 1.0, x});
  CHECK(agent.target() == initial);
  CHECK_FALSE(agent.prediction() == initial);
  agent.update({x, 1, 10.0, 1.0, x});
  CHECK(agent.target() == agent.prediction());
  agent.update({x, 1, 10.0, 1.0, x});
  CHECK_FALSE(agent.target() == agent.prediction());
}

TEST_CASE("non-finite losses are rejected") {
  const int n = policy::feature_length(2, 1);
  DqlAgent agent(n, DqlConfig{});
  std::vector<double> x(static_cast<std::size_t>(n), 0.2);
  CHECK_THROWS_AS(agent.update({x, 1, std::nan(""), 0.0, std::nullopt}), std::runtime_error);
  CHECK_THROWS_AS(agent.update({x, 1, HUGE_VAL, 0.0, std::nullopt}), std::runtime_error);
  x[0] = std::nan("");
  CHECK_THROWS_AS(agent.update({x, 1, 1.0, 0.0, std::nullopt}), std::invalid_argument);
}

TEST_CASE("transition rewards") {
  sim::RewardSchedule r;
  r.accept = {10.0, 1.0};
  r.block = {-10.0, -1.0};
  r.drop = {-100.0, -10.0};
  using K = policy::Resolution::Kind;
  CHECK(transition_reward(resolution(K::Finish, 0, 40.0, 3.0), r) == 10.0);
  CHECK(transition_reward(resolution(K::Drop, 0, 3.0, 3.0), r) == -90.0);
  CHECK(transition_reward(resolution(K::Block, 1, 3.0, 3.0), r) == -1.0);
  CHECK(transition_reward(resolution(K::Drop, 1, 13.0, 3.0), r) == doctest::Approx(1.0 - 10.0 * std::pow(0.999, 10.0)));
}

TEST_CASE("transition book pairs outcomes with successor states") {
  TransitionBook book;
  book.on_decision(1, {0.1}, 1, 0.0);
  book.on_decision(2, {0.2}, 0, 2.0);
  CHECK_FALSE(book.pop_ready().has_value());  // 1 still has no outcome
  book.on_reward(2, -1.0);                     // 2 has no successor yet
  CHECK_FALSE(book.pop_ready().has_value());
  book.on_reward(1, 10.0);
  auto t1 = book.pop_ready();
  REQUIRE(t1.has_value());
  CHECK(t1->state == std::vector<double>{0.1});
  CHECK(t1->reward == 10.0);
  CHECK(t1->dt == 2.0);
  CHECK(*t1->next == std::vector<double>{0.2});
  book.on_decision(3, {0.3}, 1, 5.0);
  auto t2 = book.pop_ready();
  REQUIRE(t2.has_value());
  CHECK(t2->action == 0);
  CHECK(t2->dt == 3.0);
  CHECK(book.pending() == 1);
  CHECK(book.flush() == 1);
  CHECK(book.pending() == 0);
  CHECK_THROWS_AS(book.on_reward(99, 1.0), std::logic_error);
  book.on_decision(4, {0.4}, 1, 6.0);
  CHECK_THROWS_AS(book.on_decision(4, {0.4}, 1, 7.0), std::logic_error);
}

TEST_CASE("a drained training run resolves every transition") {
  for (bool deep : {false, true}) {
    RlPolicy p = deep ? make_dql(true) : make_ql(true);
    std::int64_t rows = 0;
    p.set_log_sink([&](const TrainingLogRow&) { ++rows; });
    p.begin_run(7);
    const sim::Metrics m = sim::run(scenario(8.0), p, 7, 600);
    CHECK(m.active_at_end == 0);
    CHECK(p.pending() == 0);
    CHECK(p.discarded() == 0);
    CHECK(p.decisions() == 600);
    CHECK(p.updates() == 600);
    CHECK(rows == p.updates());
  }
}

TEST_CASE("training with zero requests keeps the initialization") {
  RlPolicy p = make_dql(true, 11);
  const nn::Mlp init = p.agent().prediction();
  p.begin_run(1);
  sim::run(scenario(8.0), p, 1, 0);
  CHECK(p.agent().prediction() == init);
  CHECK(p.updates() == 0);
}

TEST_CASE("frozen policies do not learn") {
  RlPolicy p = make_dql(false);
  const nn::Mlp init = p.agent().prediction();
  sim::run(scenario(8.0), p, 2, 300);
  CHECK(p.agent().prediction() == init);
  CHECK(p.updates() == 0);
  CHECK(p.decisions() == 300);
}

TEST_CASE("checkpoints restore identical behaviour") {
  for (bool deep : {false, true}) {
    RlPolicy trained = deep ? make_dql(true) : make_ql(true);
    trained.begin_run(4);
    sim::run(scenario(6.0), trained, 4, 800);
    trained.set_training(false);
    const auto restored = RlPolicy::from_checkpoint(nlohmann::json::parse(trained.checkpoint().dump()));
    CHECK(restored->name() == trained.name());
    CHECK(restored->checkpoint() == trained.checkpoint());
    const sim::Metrics a = sim::run(scenario(6.0), trained, 9, 800);
    const sim::Metrics b = sim::run(scenario(6.0), *restored, 9, 800);
    CHECK(a == b);
  }
  nlohmann::json bad = make_ql(false).checkpoint();
  bad["format"] = "other";
  CHECK_THROWS_AS(RlPolicy::from_checkpoint(bad), std::invalid_argument);
}

TEST_CASE("identical seeds give identical training trajectories") {
  RlPolicy a = make_dql(true), b = make_dql(true);
  a.begin_run(3);
  b.begin_run(3);
  sim::run(scenario(6.0), a, 3, 400);
  sim::run(scenario(6.0), b, 3, 400);
  CHECK(a.agent().prediction() == b.agent().prediction());
  CHECK(a.agent().adam() == b.agent().adam());
}
