#include "acsim/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acsim::rl {

int BinSpec::index(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("Quantizer: non-finite feature value");
  if (!grid.empty()) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(grid.size()); ++i)
      if (std::abs(grid[static_cast<std::size_t>(i)] - x) < std::abs(grid[static_cast<std::size_t>(best)] - x))
        best = i;
    return best;
  }
  const double u = (x - lo) / (hi - lo);
  const int i = static_cast<int>(std::floor(u * bins));
  return std::clamp(i, 0, bins - 1);
}

Quantizer::Quantizer(std::vector<BinSpec> specs) : specs_(std::move(specs)) {
  for (const auto& s : specs_) {
    if (s.grid.empty() && (s.bins < 1 || !(s.hi > s.lo))) throw std::invalid_argument("Quantizer: invalid bin spec");
  }
}

Quantizer Quantizer::for_features(int version, int num_types, std::vector<double> rate_grid) {
  std::vector<BinSpec> specs;
  std::sort(rate_grid.begin(), rate_grid.end());
  for (auto kind : policy::feature_kinds(version, num_types)) {
    switch (kind) {
      case policy::FeatureKind::Load: specs.push_back({0.0, 1.5, 10, {}}); break;
      case policy::FeatureKind::Demand: specs.push_back({0.013, 0.3125, 10, {}}); break;
      case policy::FeatureKind::Quality: specs.push_back({0.32, 7.6, 10, {}}); break;
      case policy::FeatureKind::Rate:
        if (rate_grid.empty())
          specs.push_back({0.0, 1.0, 10, {}});
        else if (rate_grid.size() == 1)
          specs.push_back({0.0, 2.0 * rate_grid.front(), 10, {}});
        else
          specs.push_back({0.0, 0.0, 0, rate_grid});
        break;
      case policy::FeatureKind::TypeFlag: specs.push_back({0.0, 0.0, 0, {0.0, 1.0}}); break;
    }
  }
  return Quantizer(std::move(specs));
}

std::vector<int> Quantizer::bins(std::span<const double> features) const {
  if (features.size() != specs_.size()) throw std::invalid_argument("Quantizer: feature length mismatch");
  std::vector<int> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = specs_[i].index(features[i]);
  return out;
}

std::uint64_t Quantizer::key(std::span<const double> features) const {
  const auto b = bins(features);
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto radix = static_cast<std::uint64_t>(specs_[i].count());
    if (k > (UINT64_MAX - static_cast<std::uint64_t>(b[i])) / radix)
      throw std::overflow_error("Quantizer: state space does not fit a 64-bit key");
    k = k * radix + static_cast<std::uint64_t>(b[i]);
  }
  return k;
}

QTable::QTable(double alpha, double gamma) : alpha_(alpha), gamma_(gamma) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("QTable: alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("QTable: gamma must lie in [0, 1]");
}

double QTable::get(std::uint64_t state, int action) const {
  auto it = q_.find(state);
  return it == q_.end() ? 0.0 : it->second.at(static_cast<std::size_t>(action));
}

double QTable::max(std::uint64_t state) const {
  auto it = q_.find(state);
  return it == q_.end() ? 0.0 : std::max(it->second[0], it->second[1]);
}

void QTable::set(std::uint64_t state, int action, double value) {
  q_[state].at(static_cast<std::size_t>(action)) = value;
}

double ql_update(QTable& table, const QTransition& tr) {
  if (tr.action != 0 && tr.action != 1) throw std::invalid_argument("ql_update: action must be 0 or 1");
  if (tr.dt < 0.0) throw std::invalid_argument("ql_update: negative time to next decision");
  const double q = table.get(tr.state, tr.action);
  const double future = tr.next ? std::pow(table.gamma(), tr.dt) * table.max(*tr.next) : 0.0;
  const double td = tr.reward + future - q;
  if (table.alpha() != 0.0) table.set(tr.state, tr.action, q + table.alpha() * td);
  return td;
}

Decision epsilon_greedy(std::array<double, 2> q, double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) return std::bernoulli_distribution(0.5)(rng) ? Decision::Accept : Decision::Block;
  }
  return q[1] >= q[0] ? Decision::Accept : Decision::Block;
}

Decision ql_decide(const QTable& table, std::uint64_t state, double epsilon, Rng& rng) {
  return epsilon_greedy({table.get(state, 0), table.get(state, 1)}, epsilon, rng);
}

double EpsilonSchedule::value(std::int64_t step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double f = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * f;
}

nlohmann::json to_json(const Quantizer& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : q.specs()) arr.push_back({{"lo", s.lo}, {"hi", s.hi}, {"bins", s.bins}, {"grid", s.grid}});
  return arr;
}

Quantizer quantizer_from_json(const nlohmann::json& j) {
  std::vector<BinSpec> specs;
  for (const auto& s : j)
    specs.push_back({s.at("lo").get<double>(), s.at("hi").get<double>(), s.at("bins").get<int>(),
                     s.at("grid").get<std::vector<double>>()});
  return Quantizer(std::move(specs));
}

nlohmann::json to_json(const QTable& t) {
  // Sorted by key so that the file is reproducible.
  std::vector<std::pair<std::uint64_t, std::array<double, 2>>> rows(t.entries().begin(), t.entries().end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [k, q] : rows) entries.push_back({k, q[0], q[1]});
  return {{"alpha", t.alpha()}, {"gamma", t.gamma()}, {"entries", entries}};
}

QTable qtable_from_json(const nlohmann::json& j) {
  QTable t(j.at("alpha").get<double>(), j.at("gamma").get<double>());
  for (const auto& e : j.at("entries")) {
    const auto k = e.at(0).get<std::uint64_t>();
    t.set(k, 0, e.at(1).get<double>());
    t.set(k, 1, e.at(2).get<double>());
  }
  return t;
}

}  // namespace acsim::rl
