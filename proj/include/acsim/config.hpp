#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "acsim/engine.hpp"

namespace acsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration: a JSON document with the sections layout,
/// channel, radio, arrivals, rewards, policy and run. Everything except
/// `arrivals.mean_interarrival` and `policy.kind` has a default; keys that are
/// not part of the schema are rejected.
class Config {
 public:
  Config();

  static Config from_file(const std::string& path);
  static Config from_json(const nlohmann::json& j);

  /// Applies `section.key=value`; the value is parsed as JSON when possible
  /// and taken as a string otherwise.
  void set(const std::string& assignment);

  /// Throws ConfigError naming the first missing or invalid key.
  void validate() const;

  const nlohmann::json& json() const { return j_; }
  nlohmann::json& json() { return j_; }

  template <typename T>
  T get(const std::string& dotted) const {
    const auto& node = at(dotted);
    try {
      return node.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + dotted + "' has the wrong type");
    }
  }
  bool has(const std::string& dotted) const;

  /// Hex FNV-1a hash of the canonical document (run.threads and run.out excluded).
  std::string hash() const;

  /// Mean interarrival times of the plan; falls back to arrivals.mean_interarrival.
  std::vector<double> interarrival_grid() const;
  std::vector<std::uint64_t> seeds() const;

  /// Scenario at a given per-cell mean interarrival time.
  sim::Scenario scenario(double mean_interarrival) const;
  sim::Scenario scenario() const;

  static nlohmann::json defaults();

 private:
  const nlohmann::json& at(const std::string& dotted) const;

  nlohmann::json j_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace acsim
