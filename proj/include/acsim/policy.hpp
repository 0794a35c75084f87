#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "acsim/geom.hpp"
#include "acsim/radio.hpp"
#include "acsim/rewards.hpp"

namespace acsim::policy {

using sim::Decision;

/// Everything an admission policy may look at when a request arrives.
struct DecisionContext {
  std::uint64_t request_id = 0;
  double time = 0.0;
  int ue_type = 0;
  int num_types = 1;
  geom::CellId arrival_cell = 0;
  geom::CellId candidate_cell = 0;
  double tentative_fraction = 0.0;
  double tentative_rate = 0.0;
  radio::CellLoads loads{};
  std::array<int, geom::kNumCells> ue_counts{};
  std::array<double, geom::kNumCells> mean_rates{};
  double arrival_rate = 0.0;
  double bandwidth_hz = 1e7;

  friend bool operator==(const DecisionContext&, const DecisionContext&) = default;
};

/// How an admitted (or blocked) request ended.
struct Resolution {
  enum class Kind { Block, Finish, Drop };
  std::uint64_t request_id = 0;
  int ue_type = 0;
  Kind kind = Kind::Finish;
  double time = 0.0;
  double accept_time = 0.0;
};

class AdmissionPolicy {
 public:
  virtual ~AdmissionPolicy() = default;
  virtual std::string name() const = 0;
  virtual Decision decide(const DecisionContext& ctx) = 0;
  /// True for the no-dropping clairvoyant: drops are revoked in hindsight.
  virtual bool clairvoyant() const { return false; }
  virtual void on_resolved(const Resolution&) {}
  virtual void on_run_end(double /*t*/) {}
};

Decision threshold_ue(const DecisionContext& ctx, int tau_ue);

/// Accepts when the candidate cell's occupied fraction plus the request stays
/// within `tau_fraction` (τ_R / B).
Decision threshold_resource(const DecisionContext& ctx, double tau_fraction);

class AcceptAll final : public AdmissionPolicy {
 public:
  std::string name() const override { return "accept_all"; }
  Decision decide(const DecisionContext&) override { return Decision::Accept; }
};

class BlockAll final : public AdmissionPolicy {
 public:
  std::string name() const override { return "block_all"; }
  Decision decide(const DecisionContext&) override { return Decision::Block; }
};

class ThresholdUe final : public AdmissionPolicy {
 public:
  explicit ThresholdUe(int tau_ue);
  std::string name() const override { return "threshold_ue"; }
  Decision decide(const DecisionContext& ctx) override { return threshold_ue(ctx, tau_); }
  int tau() const { return tau_; }

 private:
  int tau_;
};

class ThresholdResource final : public AdmissionPolicy {
 public:
  explicit ThresholdResource(double tau_fraction);
  std::string name() const override { return "threshold_resource"; }
  Decision decide(const DecisionContext& ctx) override { return threshold_resource(ctx, tau_); }
  double tau_fraction() const { return tau_; }

 private:
  double tau_;
};

/// Accepts everything; the engine revokes dropped connections as blocks.
class Clairvoyant final : public AdmissionPolicy {
 public:
  std::string name() const override { return "clairvoyant"; }
  Decision decide(const DecisionContext&) override { return Decision::Accept; }
  bool clairvoyant() const override { return true; }
};

}  // namespace acsim::policy
