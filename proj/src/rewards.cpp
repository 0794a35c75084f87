#include "acsim/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acsim::sim {

void RewardSchedule::validate() const {
  if (accept.empty()) throw std::invalid_argument("rewards.accept must list one value per type");
  if (block.size() != accept.size() || drop.size() != accept.size())
    throw std::invalid_argument("rewards.accept, rewards.block and rewards.drop must have equal length");
  for (double r : accept)
    if (r < 0.0) throw std::invalid_argument("rewards.accept entries must be non-negative");
  for (double r : drop)
    if (r > 0.0) throw std::invalid_argument("rewards.drop entries must be non-positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("rewards.gamma must lie in (0, 1]");
}

double RewardSchedule::drop_discount(double dt_drop) const { return std::pow(gamma, dt_drop); }

double RewardSchedule::accept_outcome(int type, bool dropped, double dt_drop) const {
  const auto k = static_cast<std::size_t>(type);
  double r = accept.at(k);
  if (dropped) r += drop_discount(dt_drop) * drop.at(k);
  return r;
}

double TypeCounts::accept_probability() const {
  return requests ? static_cast<double>(accepted) / static_cast<double>(requests) : 0.0;
}

double TypeCounts::block_probability() const {
  return requests ? static_cast<double>(blocked) / static_cast<double>(requests) : 0.0;
}

double TypeCounts::drop_probability() const {
  return accepted ? static_cast<double>(dropped) / static_cast<double>(accepted) : 0.0;
}

std::int64_t Metrics::requests() const {
  std::int64_t n = 0;
  for (const auto& c : per_type) n += c.requests;
  return n;
}

double Metrics::normalized_reward() const {
  const auto n = requests();
  return n ? 1000.0 * discounted_reward / static_cast<double>(n) : 0.0;
}

void account_event(Metrics& metrics, EventKind event, int type, const RewardSchedule& rewards, double dt_drop) {
  auto& c = metrics.per_type.at(static_cast<std::size_t>(type));
  const auto k = static_cast<std::size_t>(type);
  switch (event) {
    case EventKind::Accept:
      ++c.requests;
      ++c.accepted;
      metrics.discounted_reward += rewards.accept.at(k);
      break;
    case EventKind::Block:
      ++c.requests;
      ++c.blocked;
      metrics.discounted_reward += rewards.block.at(k);
      break;
    case EventKind::Finish:
      ++c.finished;
      break;
    case EventKind::Drop:
      if (dt_drop < 0.0) throw std::invalid_argument("account_event: negative accept-to-drop interval");
      ++c.dropped;
      metrics.discounted_reward += rewards.drop_discount(dt_drop) * rewards.drop.at(k);
      break;
  }
}

void clairvoyant_retro(Metrics& metrics, int type, const RewardSchedule& rewards) {
  auto& c = metrics.per_type.at(static_cast<std::size_t>(type));
  const auto k = static_cast<std::size_t>(type);
  if (c.accepted <= 0) throw std::logic_error("clairvoyant_retro: no accepted connection to revoke");
  metrics.discounted_reward += rewards.block.at(k) - rewards.accept.at(k);
  --c.accepted;
  ++c.blocked;
}

std::vector<std::uint64_t> drop_victims(std::vector<DropCandidate> attached, double occupied,
                                        const RewardSchedule& rewards) {
  if (!(occupied > 1.0)) throw std::invalid_argument("drop_victims: cell is not overloaded");
  std::vector<std::uint64_t> victims;
  auto cost = [&](const DropCandidate& c) {
    return std::abs(rewards.drop.at(static_cast<std::size_t>(c.type))) / c.fraction;
  };
  while (occupied > 1.0 && !attached.empty()) {
    auto it = std::min_element(attached.begin(), attached.end(), [&](const auto& a, const auto& b) {
      const double ca = cost(a), cb = cost(b);
      if (ca != cb) return ca < cb;
      return a.id < b.id;
    });
    occupied -= it->fraction;
    victims.push_back(it->id);
    attached.erase(it);
  }
  return victims;
}

}  // namespace acsim::sim
