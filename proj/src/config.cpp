#include "acsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace acsim {

namespace {

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string p;
  while (std::getline(ss, p, '.')) parts.push_back(p);
  if (parts.empty()) throw ConfigError("empty config key");
  return parts;
}

// Copies `src` onto `dst`, refusing keys that `dst` (the defaults) lacks.
// Objects listed in `open` accept arbitrary keys.
void merge(nlohmann::json& dst, const nlohmann::json& src, const std::string& prefix) {
  if (!src.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    auto& slot = dst[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge(slot, it.value(), key);
    else
      slot = it.value();
  }
}

}  // namespace

nlohmann::json Config::defaults() {
  std::vector<double> tau_grid;
  for (int k = 1; k <= 10; ++k) tau_grid.push_back(k / 10.0);
  std::vector<int> tau_ue_grid;
  for (int k = 1; k <= 40; ++k) tau_ue_grid.push_back(k);
  return {
      {"scenario_id", "default"},
      {"layout", {{"inter_site_distance", 400.0}, {"bs_height", 25.0}}},
      {"channel", {{"carrier_ghz", 2.0}, {"shadow_sigma_db", 4.0}, {"d_cor", 37.0}, {"ue_height", 1.5}}},
      {"radio",
       {{"tx_power_dbm", 46.0},
        {"noise_density_dbm_hz", -174.0},
        {"bandwidth_hz", 1e7},
        {"rate_floor", 0.32},
        {"rate_cap", 7.6},
        {"throughput_bps", {1e6}},
        {"handover_margin_db", 3.0},
        {"sweep_iterations", 1}}},
      {"arrivals",
       {{"mode", "homogeneous"},
        {"mean_interarrival", nullptr},
        {"rates", nlohmann::json::array()},
        {"t_var", 1000.0},
        {"type_mix", {1.0}},
        {"holding_mean", 200.0},
        {"speed_min", 1.0},
        {"speed_max", 5.0},
        {"rate_feature", "oracle"},
        {"ewma_half_life", 300.0}}},
      {"rewards", {{"accept", {10.0}}, {"block", {0.0}}, {"drop", {-100.0}}, {"gamma", 0.999}}},
      {"policy",
       {{"kind", nullptr},
        {"tau_fraction", 0.5},
        {"tau_ue", 10},
        {"checkpoint", ""},
        {"features", 2},
        {"ql", {{"alpha", 0.1}, {"gamma", 0.9}}},
        {"dql",
         {{"hidden", {64, 64}},
          {"learning_rate", 1e-4},
          {"gamma", 0.9},
          {"target_period", 500},
          {"reward_scale", 0.1}}},
        {"epsilon", {{"start", 1.0}, {"end", 0.05}, {"decay_fraction", 0.5}}}}},
      {"run",
       {{"requests", 10000},
        {"seeds", {1, 2, 3, 4, 5}},
        {"drain", true},
        {"threads", 0},
        {"out", "out"},
        {"event_log", false},
        {"mean_interarrival_grid", nlohmann::json::array()},
        {"tau_fraction_grid", tau_grid},
        {"tau_ue_grid", tau_ue_grid},
        {"train_requests", 200000},
        {"train_episode_requests", 10000},
        {"train_seed", 1},
        {"train_restarts", 1},
        {"validation_seeds", {1001, 1002}},
        {"trace_duration", 800.0},
        {"trace_background_load", 0.5}}},
  };
}

Config::Config() : j_(defaults()) {}

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  merge(c.j_, j, "");
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  nlohmann::json* node = &j_;
  const auto parts = split_path(key);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[parts[i]];
  }
  *node = value;
}

const nlohmann::json& Config::at(const std::string& dotted) const {
  const nlohmann::json* node = &j_;
  for (const auto& p : split_path(dotted)) {
    if (!node->is_object() || !node->contains(p)) throw ConfigError("unknown config key '" + dotted + "'");
    node = &(*node)[p];
  }
  if (node->is_null()) throw ConfigError("missing required config key '" + dotted + "'");
  return *node;
}

bool Config::has(const std::string& dotted) const {
  try {
    at(dotted);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

std::vector<double> Config::interarrival_grid() const {
  auto grid = get<std::vector<double>>("run.mean_interarrival_grid");
  if (grid.empty()) grid.push_back(get<double>("arrivals.mean_interarrival"));
  for (double g : grid)
    if (!(g > 0.0)) throw ConfigError("mean interarrival times must be positive");
  return grid;
}

std::vector<std::uint64_t> Config::seeds() const {
  auto s = get<std::vector<std::uint64_t>>("run.seeds");
  if (s.empty()) throw ConfigError("run.seeds must not be empty");
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = i + 1; k < s.size(); ++k)
      if (s[i] == s[k]) throw ConfigError("run.seeds must be distinct");
  return s;
}

sim::Scenario Config::scenario(double mean_interarrival) const {
  sim::Scenario s;
  s.inter_site_distance = get<double>("layout.inter_site_distance");
  s.bs_height = get<double>("layout.bs_height");
  s.channel.carrier_ghz = get<double>("channel.carrier_ghz");
  s.channel.shadow_sigma_db = get<double>("channel.shadow_sigma_db");
  s.channel.d_cor = get<double>("channel.d_cor");
  s.channel.ue_height = get<double>("channel.ue_height");
  s.radio.tx_power_dbm = get<double>("radio.tx_power_dbm");
  s.radio.noise_density_dbm_hz = get<double>("radio.noise_density_dbm_hz");
  s.radio.bandwidth_hz = get<double>("radio.bandwidth_hz");
  s.radio.rate_floor = get<double>("radio.rate_floor");
  s.radio.rate_cap = get<double>("radio.rate_cap");
  s.radio.throughput_bps = get<std::vector<double>>("radio.throughput_bps");
  s.radio.handover_margin_db = get<double>("radio.handover_margin_db");
  s.sweep_iterations = get<int>("radio.sweep_iterations");
  try {
    s.arrivals.mode = sim::parse_arrival_mode(get<std::string>("arrivals.mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("arrivals.mode: ") + e.what());
  }
  if (!(mean_interarrival > 0.0)) throw ConfigError("arrivals.mean_interarrival must be positive");
  s.arrivals.mean_rate = 1.0 / mean_interarrival;
  s.arrivals.rates = get<std::vector<double>>("arrivals.rates");
  s.arrivals.t_var = get<double>("arrivals.t_var");
  s.arrivals.type_mix = get<std::vector<double>>("arrivals.type_mix");
  s.holding_mean = get<double>("arrivals.holding_mean");
  s.speed_min = get<double>("arrivals.speed_min");
  s.speed_max = get<double>("arrivals.speed_max");
  const auto rf = get<std::string>("arrivals.rate_feature");
  if (rf == "oracle")
    s.rate_feature = sim::RateFeature::Oracle;
  else if (rf == "ewma")
    s.rate_feature = sim::RateFeature::Ewma;
  else
    throw ConfigError("arrivals.rate_feature must be 'oracle' or 'ewma'");
  s.ewma_half_life = get<double>("arrivals.ewma_half_life");
  s.rewards.accept = get<std::vector<double>>("rewards.accept");
  s.rewards.block = get<std::vector<double>>("rewards.block");
  s.rewards.drop = get<std::vector<double>>("rewards.drop");
  s.rewards.gamma = get<double>("rewards.gamma");
  s.drain = get<bool>("run.drain");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

sim::Scenario Config::scenario() const { return scenario(interarrival_grid().front()); }

void Config::validate() const {
  (void)get<std::string>("policy.kind");
  for (double mi : interarrival_grid()) (void)scenario(mi);
  (void)seeds();
  if (get<std::int64_t>("run.requests") < 0) throw ConfigError("run.requests must be non-negative");
  if (get<int>("run.train_restarts") < 1) throw ConfigError("run.train_restarts must be at least 1");
  if (get<std::vector<std::uint64_t>>("run.validation_seeds").empty())
    throw ConfigError("run.validation_seeds must not be empty");
  const int fv = get<int>("policy.features");
  if (fv < 1 || fv > 4) throw ConfigError("policy.features must be 1..4");
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Config::hash() const {
  nlohmann::json canon = j_;
  canon["run"].erase("threads");
  canon["run"].erase("out");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon.dump())));
  return buf;
}

}  // namespace acsim
