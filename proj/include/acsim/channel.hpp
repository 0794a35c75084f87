#pragma once

#include <array>

#include "acsim/geom.hpp"
#include "acsim/random.hpp"

namespace acsim::channel {

struct ChannelParams {
  double carrier_ghz = 2.0;
  double shadow_sigma_db = 4.0;
  double d_cor = 37.0;
  double ue_height = 1.5;

  void validate() const;
};

double pathloss_los_db(double d3d, double fc_ghz);
double pathloss_nlos_db(double d3d, double fc_ghz, double h_ut);

/// Probability of line of sight at outdoor 2D distance `d2d_out`.
double los_probability(double d2d_out);

/// LOS/NLOS flags at two consecutive anchors spaced d_cor apart along the
/// travelled path. Pathloss between anchors is linearly interpolated in dB.
struct LosSegmentState {
  double anchor_distance_travelled = 0.0;
  bool anchor_is_los = true;
  bool next_anchor_is_los = true;
  double anchor_pathloss_db = 0.0;
  double next_anchor_pathloss_db = 0.0;
  bool initialized = false;
};

struct LosStep {
  LosSegmentState state;
  double pathloss_db;
};

/// Draws both anchor flags with the LOS probability at the current distance.
LosSegmentState init_los_state(double travelled, double d2d_out, Rng& rng);

LosStep advance_los_state(LosSegmentState state, double travelled, double d3d, double d2d_out,
                          const ChannelParams& params, Rng& rng);

struct ShadowingState {
  double value_db = 0.0;
  geom::Vec2 last_position;
  bool initialized = false;
};

struct ShadowStep {
  ShadowingState state;
  double value_db;
};

ShadowingState init_shadowing(geom::Vec2 position, const ChannelParams& params, Rng& rng);

/// Correlation of the shadowing process over a displacement `dx`.
inline double shadow_correlation(double dx, double d_cor) { return std::exp(-dx / d_cor); }

/// One Gauss-Markov step: value ← ρ·value + sqrt(1-ρ²)·σ·Z, ρ = exp(-Δx/d_cor).
ShadowStep update_shadowing(ShadowingState state, geom::Vec2 new_pos, const geom::CellLayout& layout,
                            const ChannelParams& params, Rng& rng);

/// 10^{-(pathloss + shadow)/10}.
double link_gain_linear(double pathloss_db, double shadow_db);

/// Channel state of one UE towards all seven base stations.
class UeChannel {
 public:
  bool initialized() const { return initialized_; }

  /// Evaluates every link at `position`; initializes lazily on first call.
  /// Repeated calls at the same travelled distance and position are no-ops
  /// apart from the returned values.
  void evaluate(geom::Vec2 position, double travelled, const geom::CellLayout& layout,
                const ChannelParams& params, Rng& rng);

  double pathloss_db(geom::CellId bs) const;
  double shadow_db(geom::CellId bs) const;
  /// pathloss + shadowing in dB.
  double loss_db(geom::CellId bs) const;
  double gain(geom::CellId bs) const;
  const std::array<double, geom::kNumCells>& gains() const { return gain_; }
  const std::array<double, geom::kNumCells>& losses_db() const { return loss_db_; }

 private:
  void require(geom::CellId bs) const;

  bool initialized_ = false;
  double last_travelled_ = 0.0;
  std::array<LosSegmentState, geom::kNumCells> los_{};
  std::array<ShadowingState, geom::kNumCells> shadow_{};
  std::array<double, geom::kNumCells> pathloss_db_{};
  std::array<double, geom::kNumCells> loss_db_{};
  std::array<double, geom::kNumCells> gain_{};
};

}  // namespace acsim::channel
