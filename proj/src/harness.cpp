#include "acsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "acsim/channel.hpp"
#include "acsim/features.hpp"
#include "acsim/radio.hpp"

namespace acsim::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

struct Stats {
  double mean = 0.0;
  double ci95 = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    var /= static_cast<double>(xs.size() - 1);
    s.ci95 = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
  }
  return s;
}

std::vector<double> rate_grid(const Config& cfg) {
  std::vector<double> r;
  for (double mi : cfg.interarrival_grid()) r.push_back(1.0 / mi);
  return r;
}

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PolicyFactory policy_factory(const Config& cfg) {
  const auto kind = cfg.get<std::string>("policy.kind");
  if (kind == "accept_all") return [] { return std::make_unique<policy::AcceptAll>(); };
  if (kind == "block_all") return [] { return std::make_unique<policy::BlockAll>(); };
  if (kind == "clairvoyant") return [] { return std::make_unique<policy::Clairvoyant>(); };
  if (kind == "threshold_ue") {
    const int tau = cfg.get<int>("policy.tau_ue");
    return [tau] { return std::make_unique<policy::ThresholdUe>(tau); };
  }
  if (kind == "threshold_resource") {
    const double tau = cfg.get<double>("policy.tau_fraction");
    return [tau] { return std::make_unique<policy::ThresholdResource>(tau); };
  }
  if (kind == "ql" || kind == "dql") {
    const auto path = cfg.get<std::string>("policy.checkpoint");
    if (path.empty()) throw ConfigError("policy.checkpoint is required to run a '" + kind + "' policy");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint '" + path + "'");
    auto j = std::make_shared<const nlohmann::json>(nlohmann::json::parse(in));
    if (j->value("kind", "") != kind) throw ConfigError("checkpoint '" + path + "' does not hold a " + kind + " policy");
    return [j]() -> std::unique_ptr<policy::AdmissionPolicy> { return rl::RlPolicy::from_checkpoint(*j); };
  }
  throw ConfigError("policy.kind '" + kind + "' is not one of threshold_ue, threshold_resource, clairvoyant, ql, "
                    "dql, accept_all, block_all");
}

namespace {

sim::Metrics simulate(const sim::Scenario& scenario, policy::AdmissionPolicy& p, std::uint64_t seed,
                      std::int64_t requests, const std::string& event_log) {
  if (auto* rl = dynamic_cast<rl::RlPolicy*>(&p)) rl->begin_run(seed);
  sim::Simulation s(scenario, p, seed);
  std::ofstream log;
  if (!event_log.empty()) {
    log = open_out(event_log);
    log << "time,kind,ue_id,ue_type,cell,value\n";
    s.set_event_sink([&log](const sim::EventRecord& e) {
      log << fmt(e.time) << ',' << e.kind << ',' << e.ue_id << ',' << e.ue_type << ',' << e.cell << ','
          << fmt(e.value) << '\n';
    });
  }
  return s.run(requests);
}

}  // namespace

std::vector<ResultRow> run_plan(const Config& cfg, const PolicyFactory& factory, const std::string& param) {
  cfg.validate();
  const auto grid = cfg.interarrival_grid();
  const auto seeds = cfg.seeds();
  const auto requests = cfg.get<std::int64_t>("run.requests");
  const bool event_log = cfg.get<bool>("run.event_log");
  const std::string dir = event_log ? output_dir(cfg) : "";
  if (event_log) ensure_dir(dir);
  const std::string name = factory()->name();

  std::vector<ResultRow> rows(grid.size() * seeds.size());
  parallel_for(rows.size(), cfg.get<int>("run.threads"), [&](std::size_t i) {
    const double mi = grid[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    const sim::Scenario scenario = cfg.scenario(mi);
    auto p = factory();
    const std::string log_path =
        event_log ? join(dir, "events_" + name + "_" + fmt(mi) + "_" + std::to_string(seed) + ".csv") : "";
    ResultRow r{cfg.get<std::string>("scenario_id"), cfg.hash(), name, param, seed, mi,
                simulate(scenario, *p, seed, requests, log_path)};
    rows[i] = std::move(r);
  });
  return rows;
}

std::vector<FrontierRow> frontier(const Config& cfg) {
  cfg.validate();
  const auto kind = cfg.get<std::string>("policy.kind");
  std::vector<double> thresholds;
  if (kind == "threshold_resource") {
    thresholds = cfg.get<std::vector<double>>("run.tau_fraction_grid");
  } else if (kind == "threshold_ue") {
    for (int t : cfg.get<std::vector<int>>("run.tau_ue_grid")) thresholds.push_back(t);
  } else {
    throw ConfigError("frontier needs policy.kind threshold_resource or threshold_ue");
  }
  if (thresholds.empty()) throw ConfigError("frontier threshold grid is empty");
  const auto grid = cfg.interarrival_grid();
  const auto seeds = cfg.seeds();
  const auto requests = cfg.get<std::int64_t>("run.requests");

  const std::size_t per_point = thresholds.size() * seeds.size();
  std::vector<sim::Metrics> results(grid.size() * per_point);
  parallel_for(results.size(), cfg.get<int>("run.threads"), [&](std::size_t i) {
    const double mi = grid[i / per_point];
    const double tau = thresholds[(i % per_point) / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    std::unique_ptr<policy::AdmissionPolicy> p;
    if (kind == "threshold_resource")
      p = std::make_unique<policy::ThresholdResource>(tau);
    else
      p = std::make_unique<policy::ThresholdUe>(static_cast<int>(tau));
    results[i] = simulate(cfg.scenario(mi), *p, seed, requests, "");
  });

  std::vector<FrontierRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::size_t first = rows.size();
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      FrontierRow row;
      row.policy = kind;
      row.mean_interarrival = grid[g];
      row.threshold = thresholds[k];
      std::vector<double> rewards;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto& m = results[g * per_point + k * seeds.size() + s];
        row.runs.push_back(m);
        rewards.push_back(m.normalized_reward());
      }
      const Stats st = stats(rewards);
      row.mean_reward = st.mean;
      row.ci95 = st.ci95;
      rows.push_back(std::move(row));
    }
    std::size_t best = first;
    for (std::size_t k = first; k < rows.size(); ++k)
      if (rows[k].mean_reward > rows[best].mean_reward) best = k;
    rows[best].frontier = true;
  }
  return rows;
}

std::unique_ptr<rl::RlPolicy> make_learner(const Config& cfg) {
  cfg.validate();
  const auto kind = cfg.get<std::string>("policy.kind");
  const sim::Scenario scenario = cfg.scenario();
  rl::RlPolicy::Options o;
  o.feature_version = cfg.get<int>("policy.features");
  o.num_types = scenario.num_types();
  o.rewards = scenario.rewards;
  o.epsilon.start = cfg.get<double>("policy.epsilon.start");
  o.epsilon.end = cfg.get<double>("policy.epsilon.end");
  o.epsilon.decay_steps = static_cast<std::int64_t>(
      std::llround(cfg.get<double>("policy.epsilon.decay_fraction") * cfg.get<double>("run.train_requests")));
  o.training = true;
  o.seed = cfg.get<std::uint64_t>("run.train_seed");
  const auto rates = rate_grid(cfg);

  if (kind == "ql") {
    return std::make_unique<rl::RlPolicy>(o, rl::Quantizer::for_features(o.feature_version, o.num_types, rates),
                                          rl::QTable(cfg.get<double>("policy.ql.alpha"),
                                                     cfg.get<double>("policy.ql.gamma")));
  }
  if (kind == "dql") {
    rl::DqlConfig c;
    c.hidden = cfg.get<std::vector<int>>("policy.dql.hidden");
    c.learning_rate = cfg.get<double>("policy.dql.learning_rate");
    c.gamma = cfg.get<double>("policy.dql.gamma");
    c.target_period = cfg.get<std::int64_t>("policy.dql.target_period");
    c.reward_scale = cfg.get<double>("policy.dql.reward_scale");
    c.seed = o.seed;
    double max_rate = *std::max_element(rates.begin(), rates.end());
    if (scenario.arrivals.mode != sim::ArrivalMode::Homogeneous) max_rate *= 1.5;
    for (auto k : policy::feature_kinds(o.feature_version, o.num_types)) {
      switch (k) {
        case policy::FeatureKind::Load: c.input_scale.push_back(1.0); break;
        case policy::FeatureKind::Demand: c.input_scale.push_back(1.0 / scenario.radio.rate_floor / 10.0); break;
        case policy::FeatureKind::Quality: c.input_scale.push_back(1.0 / scenario.radio.rate_cap); break;
        case policy::FeatureKind::Rate: c.input_scale.push_back(1.0 / max_rate); break;
        case policy::FeatureKind::TypeFlag: c.input_scale.push_back(1.0); break;
      }
    }
    rl::DqlAgent agent(policy::feature_length(o.feature_version, o.num_types), c);
    return std::make_unique<rl::RlPolicy>(o, std::move(agent));
  }
  throw ConfigError("training needs policy.kind ql or dql");
}

namespace {

TrainingResult train_once(const Config& cfg) {
  TrainingResult out;
  out.policy = make_learner(cfg);
  out.policy->set_log_sink([&out](const rl::TrainingLogRow& r) { out.log.push_back(r); });
  const auto total = cfg.get<std::int64_t>("run.train_requests");
  const auto per_episode = std::max<std::int64_t>(1, cfg.get<std::int64_t>("run.train_episode_requests"));
  const auto train_seed = cfg.get<std::uint64_t>("run.train_seed");
  const auto grid = cfg.interarrival_grid();
  while (out.requests < total) {
    const std::int64_t n = std::min(per_episode, total - out.requests);
    const std::uint64_t seed = stream_seed(train_seed, 0x7A1A, static_cast<std::uint64_t>(out.episodes));
    Rng pick(seed);
    const double mi = grid[std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(pick)];
    const sim::Scenario scenario = cfg.scenario(mi);
    out.policy->begin_run(seed);
    sim::Simulation s(scenario, *out.policy, seed);
    s.run(n);
    out.requests += n;
    ++out.episodes;
  }
  out.policy->set_log_sink(nullptr);
  out.policy->set_training(false);
  return out;
}

double validation_reward(const Config& cfg, const rl::RlPolicy& policy) {
  Config v = cfg;
  v.json()["run"]["seeds"] = cfg.get<std::vector<std::uint64_t>>("run.validation_seeds");
  const nlohmann::json checkpoint = policy.checkpoint();
  const PolicyFactory factory = [&checkpoint] {
    return std::unique_ptr<policy::AdmissionPolicy>(rl::RlPolicy::from_checkpoint(checkpoint));
  };
  std::vector<double> xs;
  for (const auto& row : run_plan(v, factory)) xs.push_back(row.metrics.normalized_reward());
  return stats(xs).mean;
}

}  // namespace

TrainingResult train(const Config& cfg) {
  const int restarts = cfg.get<int>("run.train_restarts");
  if (restarts <= 1) return train_once(cfg);
  const auto base = cfg.get<std::uint64_t>("run.train_seed");
  TrainingResult best;
  std::vector<double> rewards;
  for (int k = 0; k < restarts; ++k) {
    Config c = cfg;
    c.json()["run"]["train_seed"] = base + static_cast<std::uint64_t>(k);
    TrainingResult t = train_once(c);
    rewards.push_back(validation_reward(c, *t.policy));
    if (k == 0 || rewards.back() > rewards[static_cast<std::size_t>(best.restart)]) {
      best = std::move(t);
      best.restart = k;
    }
  }
  best.validation_rewards = std::move(rewards);
  return best;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, int num_types) {
  out << "scenario_id,config_hash,policy,param,seed,mean_interarrival";
  for (int k = 1; k <= num_types; ++k) out << ",accept_" << k << ",block_" << k << ",drop_" << k;
  out << ",discounted_reward\n";
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << r.config_hash << ',' << r.policy << ',' << r.param << ',' << r.seed << ','
        << fmt(r.mean_interarrival);
    for (const auto& c : r.metrics.per_type)
      out << ',' << fmt(c.accept_probability()) << ',' << fmt(c.block_probability()) << ','
          << fmt(c.drop_probability());
    out << ',' << fmt(r.metrics.normalized_reward()) << '\n';
  }
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows, const Config& cfg) {
  const int num_types = static_cast<int>(cfg.get<std::vector<double>>("rewards.accept").size());
  out << "scenario_id,config_hash,policy,mean_interarrival,threshold,seeds,discounted_reward,ci95";
  for (int k = 1; k <= num_types; ++k) out << ",accept_" << k << ",drop_" << k;
  out << ",frontier\n";
  const auto id = cfg.get<std::string>("scenario_id");
  const auto hash = cfg.hash();
  for (const auto& r : rows) {
    out << id << ',' << hash << ',' << r.policy << ',' << fmt(r.mean_interarrival) << ',' << fmt(r.threshold) << ','
        << r.runs.size() << ',' << fmt(r.mean_reward) << ',' << fmt(r.ci95);
    for (int k = 0; k < num_types; ++k) {
      std::vector<double> acc, drop;
      for (const auto& m : r.runs) {
        acc.push_back(m.per_type[static_cast<std::size_t>(k)].accept_probability());
        drop.push_back(m.per_type[static_cast<std::size_t>(k)].drop_probability());
      }
      out << ',' << fmt(stats(acc).mean) << ',' << fmt(stats(drop).mean);
    }
    out << ',' << (r.frontier ? 1 : 0) << '\n';
  }
}

void write_training_log(std::ostream& out, const std::vector<rl::TrainingLogRow>& rows) {
  out << "update_index,loss,epsilon,running_reward\n";
  for (const auto& r : rows)
    out << r.update_index << ',' << fmt(r.loss) << ',' << fmt(r.epsilon) << ',' << fmt(r.running_reward) << '\n';
}

void write_curves(std::ostream& out, const std::string& kind, const Config& cfg, std::uint64_t seed) {
  const sim::Scenario sc = cfg.has("arrivals.mean_interarrival") ? cfg.scenario() : cfg.scenario(1.0);
  const auto& ch = sc.channel;
  if (kind == "pathloss") {
    out << "d3d_m,pl_los_db,pl_nlos_db\n";
    for (int d = 10; d <= 1000; ++d)
      out << d << ',' << fmt(channel::pathloss_los_db(d, ch.carrier_ghz)) << ','
          << fmt(channel::pathloss_nlos_db(d, ch.carrier_ghz, ch.ue_height)) << '\n';
  } else if (kind == "los_prob") {
    out << "d2d_out_m,p_los\n";
    for (int d = 0; d <= 500; ++d) out << d << ',' << fmt(channel::los_probability(d)) << '\n';
  } else if (kind == "rate_cap") {
    out << "sinr_db,rate_bps_hz,resource_fraction\n";
    for (int i = 0; i <= 500; ++i) {
      const double db = -15.0 + 0.1 * i;
      const double rate = radio::channel_rate(std::pow(10.0, db / 10.0), sc.radio);
      out << fmt(db) << ',' << fmt(rate) << ',' << fmt(radio::resource_demand(rate, sc.radio.throughput(0), sc.radio))
          << '\n';
    }
  } else if (kind == "trace") {
    // Two UEs leave the centre of cell 0 moving right at 1 m/s; the other
    // cells carry a fixed background load.
    const geom::CellLayout layout(sc.inter_site_distance, sc.bs_height);
    const double duration = cfg.get<double>("run.trace_duration");
    radio::CellLoads loads;
    loads.fill(cfg.get<double>("run.trace_background_load"));
    out << "t,ue,x,y,serving_bs,pathloss_db,shadow_db,rate,resource_fraction\n";
    for (std::uint64_t id = 0; id < 2; ++id) {
      radio::UeRadio ue;
      ue.id = id;
      ue.rng = Rng(stream_seed(seed, streams::kUe, id));
      ue.trajectory = geom::Trajectory::make(layout.centers()[0], {1.0, 0.0}, 1.0, 0.0);
      for (int t = 0; t <= static_cast<int>(duration); ++t) {
        ue.position = geom::position_at(ue.trajectory, t, layout);
        ue.channel.evaluate(ue.position, ue.trajectory.travelled(t), layout, ch, ue.rng);
        const auto& losses = ue.channel.losses_db();
        ue.serving = radio::select_serving_cell(std::span<const double, geom::kNumCells>(losses), ue.serving,
                                                sc.radio.handover_margin_db);
        const double s = radio::sinr(std::span<const double, geom::kNumCells>(ue.channel.gains()), *ue.serving,
                                     loads, 1.0, sc.radio);
        const double rate = radio::channel_rate(s, sc.radio);
        out << t << ',' << id + 1 << ',' << fmt(ue.position.x) << ',' << fmt(ue.position.y) << ',' << *ue.serving
            << ',' << fmt(ue.channel.pathloss_db(*ue.serving)) << ',' << fmt(ue.channel.shadow_db(*ue.serving))
            << ',' << fmt(rate) << ',' << fmt(radio::resource_demand(rate, sc.radio.throughput(0), sc.radio))
            << '\n';
      }
    }
  } else {
    throw ConfigError("unknown curve kind '" + kind + "' (pathloss, los_prob, rate_cap, trace)");
  }
}

std::string output_dir(const Config& cfg) {
  if (const char* env = std::getenv("ACSIM_OUT"); env && *env) return env;
  return cfg.get<std::string>("run.out");
}

void write_manifest(const std::string& dir, const Config& cfg, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json m{{"command", command},      {"config_hash", cfg.hash()}, {"seeds", cfg.get<nlohmann::json>("run.seeds")},
                   {"version", kVersion},     {"timestamp", stamp},        {"config", cfg.json()}};
  auto out = open_out(join(dir, "manifest_" + command + ".json"));
  out << m.dump(2) << '\n';
}

namespace {

int num_types(const Config& cfg) {
  return static_cast<int>(cfg.get<std::vector<double>>("rewards.accept").size());
}

}  // namespace

std::vector<std::string> cmd_run(const Config& cfg) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  ensure_dir(dir);
  const auto kind = cfg.get<std::string>("policy.kind");
  std::string param;
  if (kind == "threshold_resource") param = fmt(cfg.get<double>("policy.tau_fraction"));
  if (kind == "threshold_ue") param = std::to_string(cfg.get<int>("policy.tau_ue"));
  const auto rows = run_plan(cfg, policy_factory(cfg), param);
  const auto path = join(dir, "results.csv");
  auto out = open_out(path);
  write_results_csv(out, rows, num_types(cfg));
  write_manifest(dir, cfg, "run");
  return {path, join(dir, "manifest_run.json")};
}

std::vector<std::string> cmd_frontier(const Config& cfg) {
  cfg.validate();
  const auto dir = output_dir(cfg);
  ensure_dir(dir);
  const auto rows = frontier(cfg);
  const auto path = join(dir, "frontier_" + cfg.get<std::string>("policy.kind") + ".csv");
  auto out = open_out(path);
  write_frontier_csv(out, rows, cfg);
  write_manifest(dir, cfg, "frontier");
  return {path, join(dir, "manifest_frontier.json")};
}

std::vector<std::string> cmd_train(const Config& cfg) {
  const auto dir = output_dir(cfg);
  ensure_dir(dir);
  const auto result = train(cfg);
  const auto kind = cfg.get<std::string>("policy.kind");
  const auto ckpt = join(dir, "checkpoint_" + kind + ".json");
  rl::save_checkpoint(*result.policy, ckpt);
  const auto log_path = join(dir, "training_log_" + kind + ".csv");
  auto out = open_out(log_path);
  write_training_log(out, result.log);
  std::vector<std::string> files{ckpt, log_path};
  if (!result.validation_rewards.empty()) {
    const auto path = join(dir, "validation_" + kind + ".csv");
    auto v = open_out(path);
    v << "restart,train_seed,validation_reward,kept\n";
    const auto base = cfg.get<std::uint64_t>("run.train_seed");
    for (std::size_t k = 0; k < result.validation_rewards.size(); ++k)
      v << k << ',' << base + k << ',' << fmt(result.validation_rewards[k]) << ','
        << (static_cast<int>(k) == result.restart ? 1 : 0) << '\n';
    files.push_back(path);
  }
  write_manifest(dir, cfg, "train");
  files.push_back(join(dir, "manifest_train.json"));
  return files;
}

std::vector<std::string> cmd_eval(const Config& cfg) {
  cfg.validate();
  const auto kind = cfg.get<std::string>("policy.kind");
  if (kind != "ql" && kind != "dql") throw ConfigError("eval needs policy.kind ql or dql");
  const auto dir = output_dir(cfg);
  ensure_dir(dir);
  const auto rows = run_plan(cfg, policy_factory(cfg));
  const auto path = join(dir, "eval_" + kind + ".csv");
  auto out = open_out(path);
  write_results_csv(out, rows, num_types(cfg));
  write_manifest(dir, cfg, "eval");
  return {path, join(dir, "manifest_eval.json")};
}

std::vector<std::string> cmd_curves(const Config& cfg, const std::string& kind, std::uint64_t seed) {
  const auto dir = output_dir(cfg);
  ensure_dir(dir);
  std::ostringstream buf;
  write_curves(buf, kind, cfg, seed);
  const auto path = join(dir, "curves_" + kind + ".csv");
  auto out = open_out(path);
  out << buf.str();
  return {path};
}

}  // namespace acsim::harness
