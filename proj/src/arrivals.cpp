#include "acsim/arrivals.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace acsim::sim {

ArrivalMode parse_arrival_mode(const std::string& s) {
  if (s == "homogeneous") return ArrivalMode::Homogeneous;
  if (s == "heterogeneous") return ArrivalMode::Heterogeneous;
  if (s == "time_varying") return ArrivalMode::TimeVarying;
  throw std::invalid_argument("unknown arrival mode '" + s + "'");
}

std::string to_string(ArrivalMode m) {
  switch (m) {
    case ArrivalMode::Homogeneous: return "homogeneous";
    case ArrivalMode::Heterogeneous: return "heterogeneous";
    case ArrivalMode::TimeVarying: return "time_varying";
  }
  return "?";
}

void ArrivalProcess::validate() const {
  if (!(mean_rate >= 0.0)) throw std::invalid_argument("arrivals: mean rate must be non-negative");
  if (!rates.empty()) {
    if (rates.size() != geom::kNumCells) throw std::invalid_argument("arrivals.rates must list 7 per-cell rates");
    for (double r : rates)
      if (!(r >= 0.0)) throw std::invalid_argument("arrivals.rates entries must be non-negative");
  }
  if (mode == ArrivalMode::TimeVarying && !(t_var > 0.0))
    throw std::invalid_argument("arrivals.t_var must be positive");
  if (type_mix.empty()) throw std::invalid_argument("arrivals.type_mix must not be empty");
  double sum = 0.0;
  for (double p : type_mix) {
    if (p < 0.0) throw std::invalid_argument("arrivals.type_mix entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("arrivals.type_mix must sum to 1");
}

ArrivalGenerator::ArrivalGenerator(ArrivalProcess process, Rng rng)
    : process_(std::move(process)), rng_(rng), epoch_end_(std::numeric_limits<double>::infinity()) {
  process_.validate();
  draw_rates();
  if (process_.mode == ArrivalMode::TimeVarying) epoch_end_ = process_.t_var;
  for (geom::CellId c = 0; c < geom::kNumCells; ++c) next_time_[c] = draw_gap(rates_[c]);
}

void ArrivalGenerator::draw_rates() {
  switch (process_.mode) {
    case ArrivalMode::Homogeneous:
      rates_.fill(process_.mean_rate);
      break;
    case ArrivalMode::Heterogeneous:
      if (!process_.rates.empty() && epoch_ == 0) {
        for (geom::CellId c = 0; c < geom::kNumCells; ++c) rates_[c] = process_.rates[c];
        break;
      }
      [[fallthrough]];
    case ArrivalMode::TimeVarying: {
      std::uniform_real_distribution<double> u(0.5 * process_.mean_rate, 1.5 * process_.mean_rate);
      for (auto& r : rates_) r = u(rng_);
      break;
    }
  }
}

double ArrivalGenerator::draw_gap(double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  std::exponential_distribution<double> e(rate);
  return e(rng_);
}

Arrival ArrivalGenerator::next() {
  if (process_.mode == ArrivalMode::TimeVarying && process_.mean_rate <= 0.0)
    throw std::runtime_error("ArrivalGenerator: all arrival rates are zero");
  for (;;) {
    geom::CellId c = 0;
    for (geom::CellId j = 1; j < geom::kNumCells; ++j)
      if (next_time_[j] < next_time_[c]) c = j;
    const double t = next_time_[c];
    if (t >= epoch_end_) {
      // New epoch: memorylessness lets every cell restart from the boundary.
      const double start = epoch_end_;
      ++epoch_;
      epoch_end_ += process_.t_var;
      draw_rates();
      for (geom::CellId j = 0; j < geom::kNumCells; ++j) next_time_[j] = start + draw_gap(rates_[j]);
      continue;
    }
    if (!std::isfinite(t)) throw std::runtime_error("ArrivalGenerator: all arrival rates are zero");
    next_time_[c] = t + draw_gap(rates_[c]);
    int type = 0;
    if (process_.type_mix.size() > 1) {
      std::discrete_distribution<int> d(process_.type_mix.begin(), process_.type_mix.end());
      type = d(rng_);
    }
    return Arrival{t, c, type};
  }
}

std::vector<Arrival> generate_arrivals(const ArrivalProcess& process, double horizon, Rng& rng) {
  ArrivalGenerator gen(process, Rng(rng()));
  std::vector<Arrival> out;
  for (;;) {
    const Arrival a = gen.next();
    if (a.time >= horizon) break;
    out.push_back(a);
  }
  return out;
}

int rate_epochs(const ArrivalProcess& process, double horizon) {
  if (process.mode != ArrivalMode::TimeVarying) return 1;
  return static_cast<int>(std::ceil(horizon / process.t_var));
}

RateEstimator::RateEstimator(double half_life) : tau_(half_life / std::log(2.0)) {
  if (!(half_life > 0.0)) throw std::invalid_argument("RateEstimator: half-life must be positive");
}

void RateEstimator::observe(geom::CellId cell, double t) {
  level_[cell] = level_[cell] * std::exp(-(t - last_[cell]) / tau_) + 1.0 / tau_;
  last_[cell] = t;
}

double RateEstimator::rate(geom::CellId cell, double t) const {
  return level_[cell] * std::exp(-(t - last_[cell]) / tau_);
}

}  // namespace acsim::sim
