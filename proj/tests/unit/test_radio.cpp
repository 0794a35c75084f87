#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acsim/radio.hpp"

using namespace acsim;
using namespace acsim::radio;

namespace {

using Gains = std::array<double, geom::kNumCells>;

double db(double lin) { return 10.0 * std::log10(lin); }

UeRadio make_ue(std::uint64_t id, geom::Vec2 origin, double t0 = 0.0) {
  UeRadio u;
  u.id = id;
  u.rng = Rng(stream_seed(99, streams::kUe, id));
  u.trajectory = geom::Trajectory::make(origin, {1.0, 0.0}, 1.0, t0);
  return u;
}

Network make_net(int iterations = 1) {
  return Network(geom::CellLayout(), channel::ChannelParams(), RadioParams(), iterations);
}

}  // namespace

TEST_CASE("SINR without interference equals the SNR") {
  RadioParams p;
  Gains g{};
  g[0] = std::pow(10.0, -10.4);
  CellLoads loads{};
  const double s = sinr(g, 0, loads, 1.0, p);
  // Full-band noise is -174 + 70 = -104 dBm.
  CHECK(db(s) == doctest::Approx(46.0 - 104.0 + 104.0).epsilon(1e-9));
}

TEST_CASE("SINR with one equal-gain interferer at full load tends to 0 dB") {
  RadioParams p;
  p.noise_density_dbm_hz = -400.0;
  Gains g{};
  g[0] = 1e-9;
  g[3] = 1e-9;
  CellLoads loads{};
  loads[3] = 1.0;
  CHECK(sinr(g, 0, loads, 0.2, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("SINR is invariant to the UE's own fraction") {
  RadioParams p;
  Rng rng(5);
  std::uniform_real_distribution<double> lg(-14.0, -7.0), ld(0.0, 1.5), fr(1e-3, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Gains g;
    CellLoads loads;
    for (int j = 0; j < 7; ++j) {
      g[j] = std::pow(10.0, lg(rng));
      loads[j] = ld(rng);
    }
    const double a = sinr(g, i % 7, loads, fr(rng), p);
    const double b = sinr(g, i % 7, loads, fr(rng), p);
    CHECK(std::abs(a - b) <= 1e-9 * a);
  }
  Gains g{};
  CHECK_THROWS_AS(sinr(g, 7, CellLoads{}, 1.0, p), std::out_of_range);
}

TEST_CASE("SINR matches the literal formula") {
  RadioParams p;
  Gains g{1e-9, 2e-10, 3e-11, 4e-12, 5e-10, 6e-11, 7e-13};
  CellLoads loads{0.3, 0.7, 0.1, 1.2, 0.0, 0.5, 0.9};
  const double bi = 0.05;
  const double pt = std::pow(10.0, 4.6);
  const double n0 = std::pow(10.0, -17.4);
  double interf = 0.0;
  for (int j = 1; j < 7; ++j) interf += pt * bi * g[j] * loads[j];
  const double expected = pt * bi * g[0] / (n0 * 1e7 * bi + interf);
  CHECK(sinr(g, 0, loads, bi, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("channel rate examples and caps") {
  RadioParams p;
  CHECK(channel_rate(1.0, p) == doctest::Approx(1.0));
  CHECK(channel_rate(std::pow(10.0, -0.6), p) == doctest::Approx(std::log2(1.0 + std::pow(10.0, -0.6))));
  CHECK(channel_rate(std::pow(10.0, -0.6), p) == doctest::Approx(0.3233).epsilon(1e-3));
  CHECK(channel_rate(std::pow(10.0, -0.61), p) == 0.32);
  CHECK(channel_rate(std::pow(10.0, 2.29), p) == 7.6);
  CHECK(channel_rate(0.0, p) == 0.32);
  CHECK_THROWS_AS(channel_rate(-0.1, p), std::invalid_argument);
  // The caps sit at about -6 dB and 22.9 dB.
  CHECK(std::abs(db(std::pow(2.0, 0.32) - 1.0) - (-6.0)) < 0.2);
  CHECK(std::abs(db(std::pow(2.0, 7.6) - 1.0) - 22.9) < 0.2);
  double prev = 0.0;
  for (double sdb = -20.0; sdb <= 40.0; sdb += 0.05) {
    const double r = channel_rate(std::pow(10.0, sdb / 10.0), p);
    CHECK(r >= prev);
    if (sdb < -6.1) CHECK(r == 0.32);
    if (sdb > 22.9) CHECK(r == 7.6);
    prev = r;
  }
}

TEST_CASE("resource demand examples") {
  RadioParams p;
  CHECK(resource_demand(7.6, 1e6, p) == doctest::Approx(1e6 / 7.6e7));
  CHECK(resource_demand(7.6, 1e6, p) == doctest::Approx(0.01316).epsilon(1e-3));
  CHECK(resource_demand(0.32, 1e6, p) == doctest::Approx(0.3125));
  CHECK(resource_demand(1.0, 1e6, p) == doctest::Approx(0.1));
  CHECK_THROWS_AS(resource_demand(0.3, 1e6, p), std::invalid_argument);
  CHECK_THROWS_AS(resource_demand(8.0, 1e6, p), std::invalid_argument);
}

TEST_CASE("serving cell selection with hysteresis") {
  std::array<double, 7> loss{100, 110, 110, 110, 110, 110, 110};
  CHECK(select_serving_cell(loss, std::nullopt, 3.0) == 0);
  loss[2] = 97.1;  // 2.9 dB better
  CHECK(select_serving_cell(loss, 0, 3.0) == 0);
  loss[2] = 96.0;  // 4 dB better
  CHECK(select_serving_cell(loss, 0, 3.0) == 2);
  loss[2] = 97.0;  // exactly 3 dB is not enough
  CHECK(select_serving_cell(loss, 0, 3.0) == 0);
  CHECK(select_serving_cell(loss, std::nullopt, 3.0) == 2);
}

TEST_CASE("radio parameters validate") {
  RadioParams p;
  CHECK_NOTHROW(p.validate());
  p.rate_floor = 8.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RadioParams();
  p.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RadioParams();
  p.throughput_bps = {1e6, 2e6};
  CHECK(p.throughput(1) == 2e6);
  CHECK_THROWS_AS(p.throughput(2), std::out_of_range);
}

TEST_CASE("empty network sweep") {
  auto net = make_net();
  const auto r = net.load_sweep(0.0);
  CHECK(r.overloaded.empty());
  for (double b : net.loads()) CHECK(b == 0.0);
}

TEST_CASE("a single UE loads its serving cell by its demand") {
  auto net = make_net();
  auto ue = make_ue(1, {20.0, 0.0});
  net.evaluate_candidate(ue, 0.0);
  REQUIRE(ue.serving);
  CHECK(*ue.serving == 0);
  CHECK(ue.fraction == doctest::Approx(resource_demand(ue.rate, 1e6, RadioParams())));
  net.attach(ue);
  net.load_sweep(0.0);
  CHECK(net.loads()[0] == doctest::Approx(net.ue(1).fraction));
  // Alone in the network there is no interference, so the rate sits at the cap.
  CHECK(net.ue(1).rate == 7.6);
  CHECK(net.loads()[0] == doctest::Approx(1e6 / 7.6e7));
  net.detach(1);
  CHECK(net.loads()[0] == 0.0);
  CHECK_THROWS_AS(net.detach(1), std::out_of_range);
}

TEST_CASE("loads equal the sum of attached fractions after every sweep") {
  auto net = make_net();
  geom::CellLayout layout;
  Rng rng(17);
  for (std::uint64_t id = 0; id < 60; ++id) {
    auto ue = make_ue(id, layout.sample_in_domain(rng));
    net.evaluate_candidate(ue, 0.0);
    net.attach(ue);
  }
  for (double t = 1.0; t <= 30.0; t += 1.0) {
    const auto res = net.load_sweep(t);
    std::array<double, 7> sum{};
    for (const auto& [id, u] : net.ues()) sum[*u.serving] += u.fraction;
    for (int j = 0; j < 7; ++j) {
      CHECK(net.loads()[j] == doctest::Approx(sum[j]).epsilon(1e-12));
      CHECK(net.cells()[j].attached.size() == static_cast<std::size_t>(net.ue_counts()[j]));
      const bool over = net.loads()[j] > 1.0;
      CHECK(over == (std::find(res.overloaded.begin(), res.overloaded.end(), j) != res.overloaded.end()));
    }
  }
}

TEST_CASE("repeated sweeps on two heavily loaded cells converge") {
  auto net = make_net();
  const auto& c = net.layout().centers();
  Rng rng(23);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (std::uint64_t id = 0; id < 90; ++id) {
    const geom::Vec2 base = id % 2 ? c[1] : c[0];
    auto ue = make_ue(id, 0.7 * base + 0.3 * (id % 2 ? c[0] : c[1]) + geom::Vec2{u(rng), u(rng)});
    net.evaluate_candidate(ue, 0.0);
    net.attach(ue);
  }
  std::vector<double> changes;
  for (int k = 0; k < 30; ++k) changes.push_back(net.load_sweep(0.0).max_load_change);
  CHECK(net.loads()[0] > 0.5);
  CHECK(net.loads()[1] > 0.5);
  CHECK(changes.back() < 1e-6);
  CHECK(changes.back() < changes.front());
  for (std::size_t k = 3; k < changes.size(); ++k) CHECK(changes[k] <= changes[k - 1] + 1e-12);
}

TEST_CASE("attach rejects UEs without a serving cell and duplicates") {
  auto net = make_net();
  auto ue = make_ue(3, {0.0, 0.0});
  CHECK_THROWS_AS(net.attach(ue), std::logic_error);
  net.evaluate_candidate(ue, 0.0);
  net.attach(ue);
  CHECK_THROWS_AS(net.attach(ue), std::logic_error);
  CHECK_THROWS_AS(make_net(0), std::invalid_argument);
}
