#include "acsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acsim::radio {

void RadioParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("radio.bandwidth_hz must be positive");
  if (!(rate_floor > 0.0 && rate_floor < rate_cap))
    throw std::invalid_argument("radio.rate_floor must be positive and below radio.rate_cap");
  if (throughput_bps.empty()) throw std::invalid_argument("radio.throughput_bps must list one value per type");
  for (double g : throughput_bps)
    if (!(g > 0.0)) throw std::invalid_argument("radio.throughput_bps entries must be positive");
  if (handover_margin_db < 0.0) throw std::invalid_argument("radio.handover_margin_db must be non-negative");
}

double RadioParams::tx_power_mw() const { return dbm_to_mw(tx_power_dbm); }
double RadioParams::noise_density_mw_hz() const { return dbm_to_mw(noise_density_dbm_hz); }

double RadioParams::throughput(int type) const {
  if (type < 0) throw std::out_of_range("RadioParams::throughput: negative type");
  // A single entry applies to every type.
  if (throughput_bps.size() == 1) return throughput_bps.front();
  return throughput_bps.at(static_cast<std::size_t>(type));
}

double sinr(std::span<const double, geom::kNumCells> gains, geom::CellId serving, const CellLoads& loads,
            double fraction, const RadioParams& params) {
  if (serving < 0 || serving >= geom::kNumCells) throw std::out_of_range("sinr: invalid serving cell");
  const double pt = params.tx_power_mw();
  const double received = pt * fraction * gains[serving];
  const double noise = params.noise_density_mw_hz() * params.bandwidth_hz * fraction;
  double interference = 0.0;
  for (geom::CellId j = 0; j < geom::kNumCells; ++j) {
    if (j == serving) continue;
    interference += pt * fraction * gains[j] * loads[j];
  }
  return received / (noise + interference);
}

double channel_rate(double s, const RadioParams& params) {
  if (s < 0.0 || std::isnan(s)) throw std::invalid_argument("channel_rate: negative SINR");
  return std::clamp(std::log2(1.0 + s), params.rate_floor, params.rate_cap);
}

double resource_demand(double rate, double throughput_bps, const RadioParams& params) {
  if (rate < params.rate_floor - 1e-12 || rate > params.rate_cap + 1e-12)
    throw std::invalid_argument("resource_demand: rate outside the configured caps");
  return throughput_bps / (rate * params.bandwidth_hz);
}

geom::CellId select_serving_cell(std::span<const double, geom::kNumCells> loss_db,
                                 std::optional<geom::CellId> current, double margin_db) {
  geom::CellId best = 0;
  for (geom::CellId j = 1; j < geom::kNumCells; ++j)
    if (loss_db[j] < loss_db[best]) best = j;
  if (!current) return best;
  if (loss_db[*current] - loss_db[best] > margin_db) return best;
  return *current;
}

Network::Network(geom::CellLayout layout, channel::ChannelParams channel, RadioParams radio, int sweep_iterations)
    : layout_(layout), channel_(channel), radio_(std::move(radio)), sweep_iterations_(sweep_iterations) {
  channel_.validate();
  radio_.validate();
  if (sweep_iterations_ < 1) throw std::invalid_argument("radio.sweep_iterations must be at least 1");
}

CellLoads Network::loads() const {
  CellLoads out{};
  for (geom::CellId j = 0; j < geom::kNumCells; ++j) out[j] = cells_[j].occupied;
  return out;
}

std::array<int, geom::kNumCells> Network::ue_counts() const {
  std::array<int, geom::kNumCells> out{};
  for (geom::CellId j = 0; j < geom::kNumCells; ++j) out[j] = static_cast<int>(cells_[j].attached.size());
  return out;
}

std::array<double, geom::kNumCells> Network::mean_rates() const {
  std::array<double, geom::kNumCells> sum{};
  std::array<int, geom::kNumCells> n{};
  for (const auto& [id, u] : ues_) {
    sum[*u.serving] += u.rate;
    ++n[*u.serving];
  }
  for (geom::CellId j = 0; j < geom::kNumCells; ++j) sum[j] = n[j] ? sum[j] / n[j] : 0.0;
  return sum;
}

void Network::refresh(UeRadio& ue, double t, const CellLoads& loads, bool allow_handover) const {
  const double travelled = t >= ue.trajectory.start_time ? ue.trajectory.travelled(t) : 0.0;
  ue.position = t >= ue.trajectory.start_time ? geom::position_at(ue.trajectory, t, layout_) : ue.trajectory.origin;
  ue.channel.evaluate(ue.position, travelled, layout_, channel_, ue.rng);
  const auto& losses = ue.channel.losses_db();
  if (allow_handover || !ue.serving)
    ue.serving = select_serving_cell(std::span<const double, geom::kNumCells>(losses), ue.serving,
                                     radio_.handover_margin_db);
  // Fraction cancels in the SINR; the previous one (or 1 at bootstrap) is used.
  const double prev = ue.fraction > 0.0 ? ue.fraction : 1.0;
  ue.sinr = radio::sinr(std::span<const double, geom::kNumCells>(ue.channel.gains()), *ue.serving, loads, prev,
                        radio_);
  ue.rate = channel_rate(ue.sinr, radio_);
  ue.fraction = resource_demand(ue.rate, radio_.throughput(ue.type), radio_);
}

void Network::evaluate_candidate(UeRadio& ue, double t) const {
  refresh(ue, t, loads(), true);
}

void Network::attach(UeRadio ue) {
  if (!ue.serving) throw std::logic_error("Network::attach: UE has no serving cell");
  const auto id = ue.id;
  auto [it, inserted] = ues_.emplace(id, std::move(ue));
  if (!inserted) throw std::logic_error("Network::attach: duplicate UE id");
  recompute_loads();
}

UeRadio Network::detach(std::uint64_t id) {
  auto it = ues_.find(id);
  if (it == ues_.end()) throw std::out_of_range("Network::detach: unknown UE id");
  UeRadio out = std::move(it->second);
  ues_.erase(it);
  recompute_loads();
  return out;
}

const UeRadio& Network::ue(std::uint64_t id) const {
  auto it = ues_.find(id);
  if (it == ues_.end()) throw std::out_of_range("Network::ue: unknown UE id");
  return it->second;
}

void Network::recompute_loads() {
  for (auto& c : cells_) {
    c.occupied = 0.0;
    c.attached.clear();
  }
  for (const auto& [id, u] : ues_) {
    auto& c = cells_[*u.serving];
    c.occupied += u.fraction;
    c.attached.push_back(id);
  }
}

std::vector<geom::CellId> Network::overloaded() const {
  std::vector<geom::CellId> out;
  for (geom::CellId j = 0; j < geom::kNumCells; ++j)
    if (cells_[j].occupied > 1.0) out.push_back(j);
  return out;
}

SweepResult Network::load_sweep(double t) {
  SweepResult result;
  for (int it = 0; it < sweep_iterations_; ++it) {
    const CellLoads before = loads();
    for (auto& [id, u] : ues_) refresh(u, t, before, true);
    recompute_loads();
    double change = 0.0;
    for (geom::CellId j = 0; j < geom::kNumCells; ++j)
      change = std::max(change, std::abs(cells_[j].occupied - before[j]));
    result.max_load_change = change;
  }
  result.overloaded = overloaded();
  return result;
}

}  // namespace acsim::radio
