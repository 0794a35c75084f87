#include "acsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace acsim::sim {

void Scenario::validate() const {
  if (!(inter_site_distance > 0.0)) throw std::invalid_argument("layout.inter_site_distance must be positive");
  if (!(bs_height > 0.0)) throw std::invalid_argument("layout.bs_height must be positive");
  channel.validate();
  radio.validate();
  arrivals.validate();
  rewards.validate();
  if (sweep_iterations < 1) throw std::invalid_argument("radio.sweep_iterations must be at least 1");
  if (!(holding_mean > 0.0)) throw std::invalid_argument("arrivals.holding_mean must be positive");
  if (!(speed_min > 0.0 && speed_min <= speed_max)) throw std::invalid_argument("arrivals speed range is invalid");
  if (static_cast<int>(arrivals.type_mix.size()) != num_types())
    throw std::invalid_argument("arrivals.type_mix must have one entry per reward type");
  if (radio.throughput_bps.size() != 1 && static_cast<int>(radio.throughput_bps.size()) != num_types())
    throw std::invalid_argument("radio.throughput_bps must have one entry or one per type");
}

Simulation::Simulation(const Scenario& scenario, policy::AdmissionPolicy& policy, std::uint64_t seed)
    : scenario_(scenario),
      policy_(policy),
      seed_(seed),
      network_(geom::CellLayout(scenario.inter_site_distance, scenario.bs_height), scenario.channel, scenario.radio,
               scenario.sweep_iterations),
      arrivals_(scenario.arrivals, Rng(stream_seed(seed, streams::kArrivals))),
      estimator_(scenario.ewma_half_life),
      metrics_(scenario.num_types()) {
  scenario.validate();
}

void Simulation::emit(double t, const char* kind, std::uint64_t id, int type, geom::CellId cell, double value) {
  if (sink_) sink_(EventRecord{t, kind, id, type, cell, value});
}

void Simulation::sweep(double t) {
  network_.load_sweep(t);
  ++metrics_.sweeps;
  const auto counts = network_.ue_counts();
  for (geom::CellId j = 0; j < geom::kNumCells; ++j) {
    metrics_.max_cell_ue_count = std::max(metrics_.max_cell_ue_count, counts[j]);
    metrics_.max_cell_load = std::max(metrics_.max_cell_load, network_.cells()[j].occupied);
  }
}

void Simulation::check_drops(double t) {
  for (;;) {
    const auto over = network_.overloaded();
    if (over.empty()) return;
    for (geom::CellId cell : over) {
      const auto& state = network_.cells()[cell];
      std::vector<DropCandidate> cands;
      cands.reserve(state.attached.size());
      for (auto id : state.attached) {
        const auto& u = network_.ue(id);
        cands.push_back({id, u.type, u.fraction});
      }
      const auto victims = drop_victims(std::move(cands), state.occupied, scenario_.rewards);
      for (auto id : victims) {
        network_.detach(id);
        const Connection conn = active_.at(id);
        active_.erase(id);
        const double dt = t - conn.accept_time;
        if (policy_.clairvoyant()) {
          clairvoyant_retro(metrics_, conn.type, scenario_.rewards);
        } else {
          account_event(metrics_, EventKind::Drop, conn.type, scenario_.rewards, dt);
        }
        emit(t, "drop", id, conn.type, cell, dt);
        policy_.on_resolved({id, conn.type, policy::Resolution::Kind::Drop, t, conn.accept_time});
      }
    }
    sweep(t);
  }
}

policy::DecisionContext Simulation::make_context(const radio::UeRadio& ue, const Arrival& a) const {
  policy::DecisionContext ctx;
  ctx.request_id = ue.id;
  ctx.time = a.time;
  ctx.ue_type = a.type;
  ctx.num_types = scenario_.num_types();
  ctx.arrival_cell = a.cell;
  ctx.candidate_cell = *ue.serving;
  ctx.tentative_fraction = ue.fraction;
  ctx.tentative_rate = ue.rate;
  ctx.loads = network_.loads();
  ctx.ue_counts = network_.ue_counts();
  ctx.mean_rates = network_.mean_rates();
  ctx.arrival_rate = scenario_.rate_feature == RateFeature::Oracle ? arrivals_.current_rate(a.cell)
                                                                   : estimator_.rate(a.cell, a.time);
  ctx.bandwidth_hz = scenario_.radio.bandwidth_hz;
  return ctx;
}

void Simulation::on_arrival(const Arrival& a) {
  const double t = a.time;
  sweep(t);
  check_drops(t);
  estimator_.observe(a.cell, t);

  radio::UeRadio ue;
  ue.id = next_request_++;
  ue.type = a.type;
  ue.rng = Rng(stream_seed(seed_, streams::kUe, ue.id));
  const geom::Vec2 origin = network_.layout().sample_in_cell(a.cell, ue.rng);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(scenario_.speed_min, scenario_.speed_max);
  const double phi = angle(ue.rng);
  ue.trajectory = geom::Trajectory{origin, {std::cos(phi), std::sin(phi)}, speed(ue.rng), t};
  std::exponential_distribution<double> holding(1.0 / scenario_.holding_mean);
  const double hold = holding(ue.rng);
  network_.evaluate_candidate(ue, t);

  const policy::DecisionContext ctx = make_context(ue, a);
  const Decision d = policy_.decide(ctx);
  if (d == Decision::Accept) {
    account_event(metrics_, EventKind::Accept, a.type, scenario_.rewards);
    emit(t, "accept", ue.id, a.type, *ue.serving, ue.fraction);
    active_.emplace(ue.id, Connection{a.type, t});
    departures_.push({t + hold, seq_++, ue.id});
    network_.attach(std::move(ue));
    sweep(t);
    check_drops(t);
  } else {
    account_event(metrics_, EventKind::Block, a.type, scenario_.rewards);
    emit(t, "block", ue.id, a.type, *ue.serving, ue.fraction);
    policy_.on_resolved({ue.id, a.type, policy::Resolution::Kind::Block, t, t});
  }
}

void Simulation::on_finish(std::uint64_t id, double t) {
  auto it = active_.find(id);
  if (it == active_.end()) return;  // dropped earlier
  const Connection conn = it->second;
  active_.erase(it);
  const radio::UeRadio ue = network_.detach(id);
  account_event(metrics_, EventKind::Finish, conn.type, scenario_.rewards);
  emit(t, "finish", id, conn.type, *ue.serving, t - conn.accept_time);
  policy_.on_resolved({id, conn.type, policy::Resolution::Kind::Finish, t, conn.accept_time});
  sweep(t);
}

void Simulation::on_tick(double t) {
  ++metrics_.ticks;
  sweep(t);
  check_drops(t);
}

Metrics Simulation::run(std::int64_t n_requests) {
  if (n_requests < 0) throw std::invalid_argument("run: negative request count");
  std::int64_t issued = 0;
  std::optional<Arrival> next_arrival;
  if (issued < n_requests) next_arrival = arrivals_.next();
  double next_tick = 1.0;

  auto advance = [this](double t) {
    if (t < now_) throw std::logic_error("Simulation: event time went backwards");
    now_ = t;
  };

  for (;;) {
    const bool more_arrivals = next_arrival.has_value();
    if (!more_arrivals && (!scenario_.drain || active_.empty())) break;
    const double t_dep = departures_.empty() ? INFINITY : departures_.top().time;
    const double t_arr = more_arrivals ? next_arrival->time : INFINITY;
    const double t_next = std::min(t_dep, t_arr);
    if (next_tick <= t_next) {
      advance(next_tick);
      on_tick(next_tick);
      next_tick += 1.0;
      continue;
    }
    if (t_dep <= t_arr) {
      const Pending p = departures_.top();
      departures_.pop();
      advance(p.time);
      on_finish(p.ue_id, p.time);
      continue;
    }
    advance(t_arr);
    on_arrival(*next_arrival);
    ++issued;
    next_arrival.reset();
    if (issued < n_requests) next_arrival = arrivals_.next();
  }

  metrics_.end_time = now_;
  metrics_.active_at_end = static_cast<std::int64_t>(active_.size());
  policy_.on_run_end(now_);
  return metrics_;
}

Metrics run(const Scenario& scenario, policy::AdmissionPolicy& policy, std::uint64_t seed, std::int64_t n_requests) {
  Simulation sim(scenario, policy, seed);
  return sim.run(n_requests);
}

}  // namespace acsim::sim
