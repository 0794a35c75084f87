#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acsim/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&c](std::uint64_t s) {
        c.seed = s;
        c.seed_set = true;
      },
      "Run a single seed instead of run.seeds");
  cmd->add_option("--out", c.out, "Output directory (overrides run.out)");
  cmd->add_option("--set", c.sets, "Override a config key, e.g. --set run.requests=2000");
}

acsim::Config load(const Common& c) {
  auto cfg = acsim::Config::from_file(c.config);
  for (const auto& s : c.sets) cfg.set(s);
  if (c.seed_set) cfg.set("run.seeds=[" + std::to_string(c.seed) + "]");
  if (!c.out.empty()) cfg.json()["run"]["out"] = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acsim: admission control simulator for a seven-cell wraparound network"};
  app.set_version_flag("--version", acsim::harness::kVersion);
  app.require_subcommand(1);

  Common run_opts, frontier_opts, train_opts, eval_opts, curves_opts;
  std::string curve_kind = "pathloss";
  auto* run = app.add_subcommand("run", "Simulate the configured policy over the plan grid and seeds");
  add_common(run, run_opts);
  auto* front = app.add_subcommand("frontier", "Sweep a threshold policy and mark the best threshold per load");
  add_common(front, frontier_opts);
  auto* train = app.add_subcommand("train", "Train a ql or dql policy and write a checkpoint");
  add_common(train, train_opts);
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint greedily over the plan grid and seeds");
  add_common(eval, eval_opts);
  auto* curves = app.add_subcommand("curves", "Write channel and trace curves as CSV");
  add_common(curves, curves_opts);
  curves->add_option("--kind", curve_kind, "pathloss, los_prob, rate_cap or trace")
      ->check(CLI::IsMember({"pathloss", "los_prob", "rate_cap", "trace"}));

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> files;
    if (*run) files = acsim::harness::cmd_run(load(run_opts));
    if (*front) files = acsim::harness::cmd_frontier(load(frontier_opts));
    if (*train) files = acsim::harness::cmd_train(load(train_opts));
    if (*eval) files = acsim::harness::cmd_eval(load(eval_opts));
    if (*curves) {
      const auto cfg = load(curves_opts);
      files = acsim::harness::cmd_curves(cfg, curve_kind, curves_opts.seed_set ? curves_opts.seed : cfg.seeds().front());
    }
    for (const auto& f : files) std::cout << f << '\n';
  } catch (const acsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
