#include "acsim/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace acsim::channel {

void ChannelParams::validate() const {
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("channel.carrier_ghz must be positive");
  if (!(shadow_sigma_db > 0.0)) throw std::invalid_argument("channel.shadow_sigma_db must be positive");
  if (!(d_cor > 0.0)) throw std::invalid_argument("channel.d_cor must be positive");
  if (!(ue_height > 0.0)) throw std::invalid_argument("channel.ue_height must be positive");
}

double pathloss_los_db(double d3d, double fc_ghz) {
  if (!(d3d > 0.0) || !(fc_ghz > 0.0)) throw std::invalid_argument("pathloss_los_db: inputs must be positive");
  return 22.0 * std::log10(d3d) + 28.0 + 20.0 * std::log10(fc_ghz);
}

double pathloss_nlos_db(double d3d, double fc_ghz, double h_ut) {
  if (!(d3d > 0.0) || !(fc_ghz > 0.0)) throw std::invalid_argument("pathloss_nlos_db: inputs must be positive");
  return 13.54 + 39.88 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) - 0.6 * (h_ut - 1.5);
}

double los_probability(double d2d_out) {
  if (d2d_out < 0.0 || std::isnan(d2d_out)) throw std::invalid_argument("los_probability: negative distance");
  if (d2d_out <= 18.0) return 1.0;
  const double r = 18.0 / d2d_out;
  return r + (1.0 - r) * std::exp(-d2d_out / 63.0);
}

namespace {

bool draw_los(double d2d_out, Rng& rng) {
  std::bernoulli_distribution b(los_probability(d2d_out));
  return b(rng);
}

double anchor_pathloss(bool los, double d3d, const ChannelParams& p) {
  return los ? pathloss_los_db(d3d, p.carrier_ghz) : pathloss_nlos_db(d3d, p.carrier_ghz, p.ue_height);
}

// Same as update_shadowing once the wrapped displacement is known.
double shadow_step(ShadowingState& state, double dx, geom::Vec2 new_pos, const ChannelParams& params, Rng& rng) {
  if (dx > 0.0) {
    const double rho = shadow_correlation(dx, params.d_cor);
    std::normal_distribution<double> n(0.0, 1.0);
    state.value_db = rho * state.value_db + std::sqrt(1.0 - rho * rho) * params.shadow_sigma_db * n(rng);
  }
  state.last_position = new_pos;
  return state.value_db;
}

}  // namespace

LosSegmentState init_los_state(double travelled, double d2d_out, Rng& rng) {
  LosSegmentState s;
  s.anchor_distance_travelled = travelled;
  s.anchor_is_los = draw_los(d2d_out, rng);
  s.next_anchor_is_los = draw_los(d2d_out, rng);
  s.initialized = true;
  return s;
}

LosStep advance_los_state(LosSegmentState state, double travelled, double d3d, double d2d_out,
                          const ChannelParams& params, Rng& rng) {
  if (!state.initialized) state = init_los_state(travelled, d2d_out, rng);
  while (travelled >= state.anchor_distance_travelled + params.d_cor) {
    state.anchor_distance_travelled += params.d_cor;
    state.anchor_is_los = state.next_anchor_is_los;
    state.next_anchor_is_los = draw_los(d2d_out, rng);
  }
  const double frac = (travelled - state.anchor_distance_travelled) / params.d_cor;
  if (state.anchor_is_los == state.next_anchor_is_los) {
    state.anchor_pathloss_db = anchor_pathloss(state.anchor_is_los, d3d, params);
    state.next_anchor_pathloss_db = state.anchor_pathloss_db;
  } else {
    state.anchor_pathloss_db = anchor_pathloss(state.anchor_is_los, d3d, params);
    state.next_anchor_pathloss_db = anchor_pathloss(state.next_anchor_is_los, d3d, params);
  }
  const double pl = (1.0 - frac) * state.anchor_pathloss_db + frac * state.next_anchor_pathloss_db;
  return {state, pl};
}

ShadowingState init_shadowing(geom::Vec2 position, const ChannelParams& params, Rng& rng) {
  std::normal_distribution<double> n(0.0, params.shadow_sigma_db);
  return ShadowingState{n(rng), position, true};
}

ShadowStep update_shadowing(ShadowingState state, geom::Vec2 new_pos, const geom::CellLayout& layout,
                            const ChannelParams& params, Rng& rng) {
  if (!state.initialized) {
    state = init_shadowing(new_pos, params, rng);
    return {state, state.value_db};
  }
  const double dx = geom::wrapped_distance_2d(new_pos, state.last_position, layout);
  const double v = shadow_step(state, dx, new_pos, params, rng);
  return {state, v};
}

double link_gain_linear(double pathloss_db, double shadow_db) {
  return std::exp(-(pathloss_db + shadow_db) * (std::numbers::ln10 / 10.0));
}

void UeChannel::evaluate(geom::Vec2 position, double travelled, const geom::CellLayout& layout,
                         const ChannelParams& params, Rng& rng) {
  if (initialized_ && travelled == last_travelled_ && position == shadow_[0].last_position) return;
  // Every link shares the UE displacement, so the shadowing step uses one dx.
  const double dx = initialized_ ? geom::wrapped_distance_2d(position, shadow_[0].last_position, layout) : 0.0;
  const double dh = layout.bs_height() - params.ue_height;
  for (geom::CellId bs = 0; bs < geom::kNumCells; ++bs) {
    const double d2 = geom::wrapped_distance_2d(position, layout.centers()[bs], layout);
    const double d3 = std::sqrt(d2 * d2 + dh * dh);
    const LosStep los = advance_los_state(los_[bs], travelled, d3, d2, params, rng);
    los_[bs] = los.state;
    const double sh = initialized_ ? shadow_step(shadow_[bs], dx, position, params, rng)
                                   : (shadow_[bs] = init_shadowing(position, params, rng)).value_db;
    pathloss_db_[bs] = los.pathloss_db;
    loss_db_[bs] = los.pathloss_db + sh;
    gain_[bs] = link_gain_linear(los.pathloss_db, sh);
  }
  last_travelled_ = travelled;
  initialized_ = true;
}

void UeChannel::require(geom::CellId bs) const {
  if (bs < 0 || bs >= geom::kNumCells) throw std::out_of_range("UeChannel: invalid base station index");
  if (!initialized_) throw std::logic_error("UeChannel: link queried before initialization");
}

double UeChannel::pathloss_db(geom::CellId bs) const {
  require(bs);
  return pathloss_db_[bs];
}

double UeChannel::shadow_db(geom::CellId bs) const {
  require(bs);
  return shadow_[bs].value_db;
}

double UeChannel::loss_db(geom::CellId bs) const {
  require(bs);
  return loss_db_[bs];
}

double UeChannel::gain(geom::CellId bs) const {
  require(bs);
  return gain_[bs];
}

}  // namespace acsim::channel
