#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace acsim::sim {

enum class Decision : int { Block = 0, Accept = 1 };

inline constexpr int action_index(Decision d) { return static_cast<int>(d); }
inline constexpr Decision decision_from_index(int a) { return a == 1 ? Decision::Accept : Decision::Block; }

/// Per-type rewards for accepting, blocking and dropping, plus the per-second
/// discount base applied to drop penalties.
struct RewardSchedule {
  std::vector<double> accept{10.0};
  std::vector<double> block{0.0};
  std::vector<double> drop{-100.0};
  double gamma = 0.999;

  int num_types() const { return static_cast<int>(accept.size()); }
  void validate() const;

  double drop_discount(double dt_drop) const;
  /// Reward credited to the accept decision of a UE (drop term discounted).
  double accept_outcome(int type, bool dropped, double dt_drop) const;
};

enum class EventKind { Accept, Block, Finish, Drop };

struct TypeCounts {
  std::int64_t requests = 0;
  std::int64_t accepted = 0;
  std::int64_t blocked = 0;
  std::int64_t dropped = 0;
  std::int64_t finished = 0;

  double accept_probability() const;
  double block_probability() const;
  /// Dropped connections per accepted connection.
  double drop_probability() const;

  friend bool operator==(const TypeCounts&, const TypeCounts&) = default;
};

struct Metrics {
  std::vector<TypeCounts> per_type;
  double discounted_reward = 0.0;
  // diagnostics
  double end_time = 0.0;
  std::int64_t ticks = 0;
  std::int64_t sweeps = 0;
  std::int64_t active_at_end = 0;
  int max_cell_ue_count = 0;
  double max_cell_load = 0.0;

  explicit Metrics(int num_types = 1) : per_type(static_cast<std::size_t>(num_types)) {}

  std::int64_t requests() const;
  /// Discounted reward per 1000 requests.
  double normalized_reward() const;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Adds the reward of `event` for a UE of `type`. `dt_drop` is the time
/// between acceptance and drop and is only used for drops.
void account_event(Metrics& metrics, EventKind event, int type, const RewardSchedule& rewards,
                   double dt_drop = 0.0);

/// Hindsight blocking of a dropped UE: removes its accept reward, adds the
/// block penalty and moves it from accepted to blocked.
void clairvoyant_retro(Metrics& metrics, int type, const RewardSchedule& rewards);

struct DropCandidate {
  std::uint64_t id;
  int type;
  double fraction;
};

/// Cost-per-resource victims: repeatedly removes the UE with the smallest
/// |r_D| / fraction until the occupied fraction is at most 1. Ties go to the
/// lowest id. Throws if the cell is not overloaded.
std::vector<std::uint64_t> drop_victims(std::vector<DropCandidate> attached, double occupied,
                                        const RewardSchedule& rewards);

}  // namespace acsim::sim
