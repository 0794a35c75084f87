#include "acsim/policy.hpp"

#include <stdexcept>

namespace acsim::policy {

Decision threshold_ue(const DecisionContext& ctx, int tau_ue) {
  return ctx.ue_counts.at(static_cast<std::size_t>(ctx.candidate_cell)) < tau_ue ? Decision::Accept
                                                                                : Decision::Block;
}

Decision threshold_resource(const DecisionContext& ctx, double tau_fraction) {
  // Compared in Hz so that the threshold reads as τ_R against B·fractions.
  const double occupied_hz = ctx.loads.at(static_cast<std::size_t>(ctx.candidate_cell)) * ctx.bandwidth_hz;
  const double request_hz = ctx.tentative_fraction * ctx.bandwidth_hz;
  const double tau_hz = tau_fraction * ctx.bandwidth_hz;
  return occupied_hz + request_hz <= tau_hz * (1.0 + 1e-12) ? Decision::Accept : Decision::Block;
}

ThresholdUe::ThresholdUe(int tau_ue) : tau_(tau_ue) {
  if (tau_ue < 0) throw std::invalid_argument("threshold_ue: tau must be non-negative");
}

ThresholdResource::ThresholdResource(double tau_fraction) : tau_(tau_fraction) {
  if (!(tau_fraction >= 0.0 && tau_fraction <= 1.0))
    throw std::invalid_argument("threshold_resource: tau fraction must lie in [0, 1]");
}

}  // namespace acsim::policy
