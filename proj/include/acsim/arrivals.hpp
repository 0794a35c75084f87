#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "acsim/geom.hpp"
#include "acsim/random.hpp"

namespace acsim::sim {

enum class ArrivalMode { Homogeneous, Heterogeneous, TimeVarying };

ArrivalMode parse_arrival_mode(const std::string& s);
std::string to_string(ArrivalMode m);

/// Per-cell Poisson arrivals.
///
/// Homogeneous: every cell uses `mean_rate`. Heterogeneous: `rates` if given,
/// otherwise one draw of U[0.5, 1.5]·mean_rate per cell at the start of the
/// run. TimeVarying: the heterogeneous draw is repeated every `t_var` seconds.
struct ArrivalProcess {
  ArrivalMode mode = ArrivalMode::Homogeneous;
  double mean_rate = 0.1;  // per cell, 1/s
  std::vector<double> rates;
  double t_var = 1000.0;
  std::vector<double> type_mix{1.0};

  void validate() const;
};

struct Arrival {
  double time;
  geom::CellId cell;
  int type;
};

/// Lazy merged arrival stream over the seven cells.
class ArrivalGenerator {
 public:
  ArrivalGenerator(ArrivalProcess process, Rng rng);

  Arrival next();
  /// Rate of `cell` in effect at the time of the last returned arrival.
  double current_rate(geom::CellId cell) const { return rates_[cell]; }
  const std::array<double, geom::kNumCells>& current_rates() const { return rates_; }
  /// Number of rate epochs entered so far (1 for fixed-rate modes).
  int epochs() const { return epoch_ + 1; }

 private:
  void draw_rates();
  double draw_gap(double rate);

  ArrivalProcess process_;
  Rng rng_;
  std::array<double, geom::kNumCells> rates_{};
  std::array<double, geom::kNumCells> next_time_{};
  int epoch_ = 0;
  double epoch_end_;
};

/// Every arrival in [0, horizon).
std::vector<Arrival> generate_arrivals(const ArrivalProcess& process, double horizon, Rng& rng);

/// Number of rate epochs intersecting [0, horizon).
int rate_epochs(const ArrivalProcess& process, double horizon);

/// Exponentially weighted arrival-rate estimate per cell.
class RateEstimator {
 public:
  explicit RateEstimator(double half_life);
  void observe(geom::CellId cell, double t);
  double rate(geom::CellId cell, double t) const;

 private:
  double tau_;
  std::array<double, geom::kNumCells> level_{};
  std::array<double, geom::kNumCells> last_{};
};

}  // namespace acsim::sim
