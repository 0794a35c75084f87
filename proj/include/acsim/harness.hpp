#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/engine.hpp"
#include "acsim/policy.hpp"
#include "acsim/rl_policy.hpp"

namespace acsim::harness {

inline constexpr const char* kVersion = "0.1.0";

struct ResultRow {
  std::string scenario_id;
  std::string config_hash;
  std::string policy;
  std::string param;
  std::uint64_t seed = 0;
  double mean_interarrival = 0.0;
  sim::Metrics metrics;
};

struct FrontierRow {
  std::string policy;
  double mean_interarrival = 0.0;
  double threshold = 0.0;
  std::vector<sim::Metrics> runs;
  double mean_reward = 0.0;
  double ci95 = 0.0;
  bool frontier = false;
};

using PolicyFactory = std::function<std::unique_ptr<policy::AdmissionPolicy>()>;

/// Factory for `policy.kind` (and its parameters) as configured. Learning
/// policies are loaded from `policy.checkpoint` and run greedily.
PolicyFactory policy_factory(const Config& cfg);

/// Runs `count` independent tasks on up to `threads` workers (0 = hardware
/// concurrency). Results keep task order.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

/// One simulation per (grid point, seed) for the configured policy.
std::vector<ResultRow> run_plan(const Config& cfg, const PolicyFactory& factory, const std::string& param = "");

/// Threshold sweep of `policy.kind` (threshold_resource or threshold_ue).
std::vector<FrontierRow> frontier(const Config& cfg);

struct TrainingResult {
  std::unique_ptr<rl::RlPolicy> policy;
  std::vector<rl::TrainingLogRow> log;
  std::int64_t requests = 0;
  std::int64_t episodes = 0;
  int restart = 0;                         // index of the kept restart
  std::vector<double> validation_rewards;  // one per restart when restarts > 1
};

/// Builds an untrained learner for `policy.kind` ∈ {ql, dql}.
std::unique_ptr<rl::RlPolicy> make_learner(const Config& cfg);

/// Trains over `run.train_requests` requests split into episodes whose mean
/// interarrival time is drawn from the plan grid. With `run.train_restarts`
/// K > 1, restart k trains from seed `run.train_seed` + k and the one with the
/// highest mean reward on `run.validation_seeds` is kept (ties to the lowest k).
TrainingResult train(const Config& cfg);

// CSV writers; column order is fixed.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, int num_types);
void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows, const Config& cfg);
void write_training_log(std::ostream& out, const std::vector<rl::TrainingLogRow>& rows);

/// Curve samples for external plotting: pathloss, los_prob, rate_cap, trace.
void write_curves(std::ostream& out, const std::string& kind, const Config& cfg, std::uint64_t seed);

/// Writes manifest.json with the config, its hash, the seeds and the version.
void write_manifest(const std::string& dir, const Config& cfg, const std::string& command);

/// Output directory: ACSIM_OUT if set, else `run.out`.
std::string output_dir(const Config& cfg);

// Command entry points used by the CLI. Each returns the files written.
std::vector<std::string> cmd_run(const Config& cfg);
std::vector<std::string> cmd_frontier(const Config& cfg);
std::vector<std::string> cmd_train(const Config& cfg);
std::vector<std::string> cmd_eval(const Config& cfg);
std::vector<std::string> cmd_curves(const Config& cfg, const std::string& kind, std::uint64_t seed);

}  // namespace acsim::harness
