#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "acsim/arrivals.hpp"
#include "acsim/channel.hpp"
#include "acsim/geom.hpp"
#include "acsim/policy.hpp"
#include "acsim/radio.hpp"
#include "acsim/rewards.hpp"

namespace acsim::sim {

enum class RateFeature { Oracle, Ewma };

struct Scenario {
  double inter_site_distance = 400.0;
  double bs_height = 25.0;
  channel::ChannelParams channel;
  radio::RadioParams radio;
  int sweep_iterations = 1;
  ArrivalProcess arrivals;
  RewardSchedule rewards;
  double holding_mean = 200.0;
  double speed_min = 1.0;
  double speed_max = 5.0;
  /// Keep simulating after the last request until every UE has left.
  bool drain = true;
  RateFeature rate_feature = RateFeature::Oracle;
  double ewma_half_life = 300.0;

  int num_types() const { return rewards.num_types(); }
  void validate() const;
};

struct EventRecord {
  double time;
  std::string kind;  // accept, block, finish, drop, tick
  std::uint64_t ue_id;
  int ue_type;
  geom::CellId cell;
  double value;  // resource fraction, or accept-to-drop interval for drops
};

using EventSink = std::function<void(const EventRecord&)>;

/// One admission-control simulation: arrivals, departures, per-second load
/// updates and overload drops, with reward accounting.
class Simulation {
 public:
  Simulation(const Scenario& scenario, policy::AdmissionPolicy& policy, std::uint64_t seed);

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

  /// Processes exactly `n_requests` arrivals plus every induced event.
  Metrics run(std::int64_t n_requests);

  const radio::Network& network() const { return network_; }

 private:
  struct Pending {
    double time;
    std::uint64_t seq;
    std::uint64_t ue_id;
    bool operator>(const Pending& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  struct Connection {
    int type;
    double accept_time;
  };

  void on_arrival(const Arrival& a);
  void on_finish(std::uint64_t id, double t);
  void on_tick(double t);
  void sweep(double t);
  void check_drops(double t);
  void emit(double t, const char* kind, std::uint64_t id, int type, geom::CellId cell, double value);
  policy::DecisionContext make_context(const radio::UeRadio& ue, const Arrival& a) const;

  Scenario scenario_;
  policy::AdmissionPolicy& policy_;
  std::uint64_t seed_;
  radio::Network network_;
  ArrivalGenerator arrivals_;
  RateEstimator estimator_;
  Metrics metrics_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> departures_;
  std::unordered_map<std::uint64_t, Connection> active_;
  std::uint64_t next_request_ = 0;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  EventSink sink_;
};

Metrics run(const Scenario& scenario, policy::AdmissionPolicy& policy, std::uint64_t seed, std::int64_t n_requests);

}  // namespace acsim::sim
