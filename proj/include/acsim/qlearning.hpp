#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "acsim/features.hpp"
#include "acsim/random.hpp"
#include "acsim/rewards.hpp"

namespace acsim::rl {

using sim::Decision;

/// Binning rule for one feature: `bins` uniform bins over [lo, hi] (values
/// outside are clamped to the edge bins), or nearest entry of `grid`.
struct BinSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 10;
  std::vector<double> grid;

  int count() const { return grid.empty() ? bins : static_cast<int>(grid.size()); }
  int index(double x) const;

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

class Quantizer {
 public:
  Quantizer() = default;
  explicit Quantizer(std::vector<BinSpec> specs);

  /// Default binning for a feature version: 10 bins over [0, 1.5] for loads,
  /// [0.013, 0.3125] for the request's fraction, [0.32, 7.6] for quality; the
  /// arrival rate snaps to `rate_grid` (10 bins over [0, 2·max] if empty).
  static Quantizer for_features(int version, int num_types, std::vector<double> rate_grid);

  std::vector<int> bins(std::span<const double> features) const;
  std::uint64_t key(std::span<const double> features) const;
  std::size_t size() const { return specs_.size(); }
  const std::vector<BinSpec>& specs() const { return specs_; }

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  std::vector<BinSpec> specs_;
};

/// Look-up table of Q values; entries never written read as 0.
class QTable {
 public:
  QTable(double alpha = 0.1, double gamma = 0.9);

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double get(std::uint64_t state, int action) const;
  double max(std::uint64_t state) const;
  void set(std::uint64_t state, int action, double value);
  std::size_t size() const { return q_.size(); }
  const std::unordered_map<std::uint64_t, std::array<double, 2>>& entries() const { return q_; }

 private:
  double alpha_;
  double gamma_;
  std::unordered_map<std::uint64_t, std::array<double, 2>> q_;
};

/// Completed transition over quantized states. `next` is empty for a terminal
/// transition (no further decision was observed).
struct QTransition {
  std::uint64_t state = 0;
  int action = 1;
  double reward = 0.0;
  double dt = 0.0;
  std::optional<std::uint64_t> next;
};

/// Q ← Q + α·(r + γ^Δt·max_a Q(s', a) − Q). Returns the TD error.
double ql_update(QTable& table, const QTransition& tr);

/// Greedy action with ε-exploration; ties go to accept.
Decision ql_decide(const QTable& table, std::uint64_t state, double epsilon, Rng& rng);

/// ε-greedy over two Q values, ties to accept.
Decision epsilon_greedy(std::array<double, 2> q, double epsilon, Rng& rng);

/// Linear decay from `start` to `end` over `decay_steps` decisions, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t decay_steps = 0;

  double value(std::int64_t step) const;
};

nlohmann::json to_json(const Quantizer& q);
Quantizer quantizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QTable& t);
QTable qtable_from_json(const nlohmann::json& j);

}  // namespace acsim::rl
