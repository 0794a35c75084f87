#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "acsim/dql.hpp"
#include "acsim/policy.hpp"
#include "acsim/qlearning.hpp"
#include "acsim/rewards.hpp"

namespace acsim::rl {

/// Decision awaiting its reward (outcome of the request) and its successor
/// state (the next decision, wherever it happens).
struct PendingTransition {
  std::vector<double> state;
  int action = 1;
  double decision_time = 0.0;
  std::optional<std::vector<double>> next_state;
  double dt = 0.0;
  std::optional<double> reward;
};

/// Drop penalties land on the accept-time state of the dropped UE.
class TransitionBook {
 public:
  void on_decision(std::uint64_t id, std::vector<double> state, int action, double time);
  void on_reward(std::uint64_t id, double reward);
  /// Resolves whatever has a reward but no successor as terminal and discards
  /// entries still waiting for an outcome. Returns the number discarded.
  std::size_t flush();

  std::optional<Transition> pop_ready();
  std::size_t pending() const { return pending_.size(); }

 private:
  void try_complete(std::uint64_t id);

  std::map<std::uint64_t, PendingTransition> pending_;
  std::optional<std::uint64_t> last_decision_;
  std::deque<Transition> ready_;
};

/// Reward of a resolved request under the accept/block/drop schedule.
double transition_reward(const policy::Resolution& res, const sim::RewardSchedule& rewards);

struct TrainingLogRow {
  std::int64_t update_index;
  double loss;
  double epsilon;
  double running_reward;
};

enum class LearnerKind { QLearning, DeepQ };

/// Admission policy backed by a Q table or a DQL agent. In training mode it
/// explores ε-greedily and learns from every resolved transition; otherwise it
/// acts greedily and leaves its parameters untouched.
class RlPolicy final : public policy::AdmissionPolicy {
 public:
  struct Options {
    int feature_version = 2;
    int num_types = 1;
    sim::RewardSchedule rewards;
    EpsilonSchedule epsilon;
    bool training = false;
    std::uint64_t seed = 1;
  };

  RlPolicy(Options options, Quantizer quantizer, QTable table);
  RlPolicy(Options options, DqlAgent agent);

  std::string name() const override { return kind_ == LearnerKind::QLearning ? "ql" : "dql"; }
  policy::Decision decide(const policy::DecisionContext& ctx) override;
  void on_resolved(const policy::Resolution& res) override;
  void on_run_end(double t) override;

  void set_training(bool training) { options_.training = training; }
  bool training() const { return options_.training; }
  void set_epsilon(EpsilonSchedule e) { options_.epsilon = e; }
  /// Restarts the per-run bookkeeping and reseeds exploration.
  void begin_run(std::uint64_t seed);
  void set_log_sink(std::function<void(const TrainingLogRow&)> sink) { log_ = std::move(sink); }

  LearnerKind kind() const { return kind_; }
  const Options& options() const { return options_; }
  const QTable& table() const { return *table_; }
  const Quantizer& quantizer() const { return quantizer_; }
  const DqlAgent& agent() const { return *agent_; }
  DqlAgent& agent() { return *agent_; }
  std::int64_t decisions() const { return decisions_; }
  std::int64_t updates() const { return updates_; }
  std::size_t discarded() const { return discarded_; }
  std::size_t pending() const { return book_.pending(); }

  nlohmann::json checkpoint() const;
  static std::unique_ptr<RlPolicy> from_checkpoint(const nlohmann::json& j);

 private:
  void learn();

  Options options_;
  LearnerKind kind_;
  Quantizer quantizer_;
  std::optional<QTable> table_;
  std::optional<DqlAgent> agent_;
  TransitionBook book_;
  Rng rng_;
  std::int64_t decisions_ = 0;
  std::int64_t updates_ = 0;
  std::size_t discarded_ = 0;
  double reward_sum_ = 0.0;
  std::function<void(const TrainingLogRow&)> log_;
};

void save_checkpoint(const RlPolicy& policy, const std::string& path);
std::unique_ptr<RlPolicy> load_checkpoint(const std::string& path);

}  // namespace acsim::rl
