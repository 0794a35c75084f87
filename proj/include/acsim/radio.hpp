#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "acsim/channel.hpp"
#include "acsim/geom.hpp"

namespace acsim::radio {

struct RadioParams {
  double tx_power_dbm = 46.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 1e7;
  double rate_floor = 0.32;
  double rate_cap = 7.6;
  std::vector<double> throughput_bps{1e6};  // one entry per UE type
  double handover_margin_db = 3.0;

  void validate() const;
  double tx_power_mw() const;
  double noise_density_mw_hz() const;
  double throughput(int type) const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

using CellLoads = std::array<double, geom::kNumCells>;

/// SINR of a UE served by `serving` with allocated fraction `fraction`.
/// Interference from cell j is weighted by that cell's occupied fraction.
double sinr(std::span<const double, geom::kNumCells> gains, geom::CellId serving, const CellLoads& loads,
            double fraction, const RadioParams& params);

/// log2(1 + sinr) clamped to [rate_floor, rate_cap].
double channel_rate(double sinr, const RadioParams& params);

/// Fraction of the cell bandwidth needed to carry `throughput_bps` at `rate`.
double resource_demand(double rate, double throughput_bps, const RadioParams& params);

/// Serving cell given per-cell combined loss (pathloss + shadowing, dB).
/// Without a current cell the lowest-loss cell is returned; otherwise the UE
/// only switches when the best cell beats the current one by more than the margin.
geom::CellId select_serving_cell(std::span<const double, geom::kNumCells> loss_db,
                                 std::optional<geom::CellId> current, double margin_db);

struct UeRadio {
  std::uint64_t id = 0;
  int type = 0;
  geom::Trajectory trajectory;
  channel::UeChannel channel;
  Rng rng;
  geom::Vec2 position;
  std::optional<geom::CellId> serving;
  double sinr = 0.0;
  double rate = 0.0;
  double fraction = 0.0;
};

struct CellState {
  double occupied = 0.0;
  std::vector<std::uint64_t> attached;
};

struct SweepResult {
  std::vector<geom::CellId> overloaded;
  double max_load_change = 0.0;
};

/// Radio view of the network: every attached UE and the per-cell occupancy.
class Network {
 public:
  Network(geom::CellLayout layout, channel::ChannelParams channel, RadioParams radio, int sweep_iterations = 1);

  const geom::CellLayout& layout() const { return layout_; }
  const channel::ChannelParams& channel_params() const { return channel_; }
  const RadioParams& radio_params() const { return radio_; }

  CellLoads loads() const;
  const std::array<CellState, geom::kNumCells>& cells() const { return cells_; }
  std::array<int, geom::kNumCells> ue_counts() const;
  /// Mean channel rate of the UEs attached to each cell (0 for empty cells).
  std::array<double, geom::kNumCells> mean_rates() const;

  /// Evaluates a UE that is not attached: channel, initial serving cell, SINR,
  /// rate and resource fraction against the current loads.
  void evaluate_candidate(UeRadio& ue, double t) const;

  void attach(UeRadio ue);
  UeRadio detach(std::uint64_t id);
  bool contains(std::uint64_t id) const { return ues_.contains(id); }
  const UeRadio& ue(std::uint64_t id) const;
  const std::map<std::uint64_t, UeRadio>& ues() const { return ues_; }
  std::size_t size() const { return ues_.size(); }

  /// Refreshes every attached UE (position, channel, serving cell, SINR, rate,
  /// fraction) at time t using the loads at the start of the pass, then
  /// recomputes the occupancy of every cell. Returns cells with load > 1.
  SweepResult load_sweep(double t);

  std::vector<geom::CellId> overloaded() const;

  /// Recomputes cell occupancy from the attached UEs' current fractions.
  void recompute_loads();

 private:
  void refresh(UeRadio& ue, double t, const CellLoads& loads, bool allow_handover) const;

  geom::CellLayout layout_;
  channel::ChannelParams channel_;
  RadioParams radio_;
  int sweep_iterations_;
  std::map<std::uint64_t, UeRadio> ues_;
  std::array<CellState, geom::kNumCells> cells_{};
};

}  // namespace acsim::radio
