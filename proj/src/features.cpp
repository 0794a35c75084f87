#include "acsim/features.hpp"

#include <stdexcept>

namespace acsim::policy {

namespace {

void check_version(int version) {
  if (version < 1 || version > 4) throw std::invalid_argument("featurize: version must be 1..4");
}

}  // namespace

int feature_head_length(int version) {
  check_version(version);
  switch (version) {
    case 1: return 1;
    case 2: return 2;
    case 3: return 8;
    default: return 9;
  }
}

int feature_length(int version, int num_types) { return feature_head_length(version) + 1 + num_types; }

std::vector<FeatureKind> feature_kinds(int version, int num_types) {
  std::vector<FeatureKind> k{FeatureKind::Load};
  if (version >= 2) k.push_back(FeatureKind::Demand);
  if (version >= 3) k.insert(k.end(), 6, FeatureKind::Load);
  if (version >= 4) k.push_back(FeatureKind::Quality);
  k.push_back(FeatureKind::Rate);
  k.insert(k.end(), static_cast<std::size_t>(num_types), FeatureKind::TypeFlag);
  return k;
}

std::vector<double> featurize(int version, const DecisionContext& ctx) {
  check_version(version);
  if (ctx.ue_type < 0 || ctx.ue_type >= ctx.num_types) throw std::out_of_range("featurize: UE type out of range");
  const auto cell = static_cast<std::size_t>(ctx.candidate_cell);
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(feature_length(version, ctx.num_types)));
  f.push_back(ctx.loads.at(cell));
  if (version >= 2) f.push_back(ctx.tentative_fraction);
  if (version >= 3) {
    for (std::size_t j = 0; j < ctx.loads.size(); ++j)
      if (j != cell) f.push_back(ctx.loads[j]);
  }
  if (version >= 4) f.push_back(ctx.mean_rates.at(cell));
  f.push_back(ctx.arrival_rate);
  for (int t = 0; t < ctx.num_types; ++t) f.push_back(t == ctx.ue_type ? 1.0 : 0.0);
  return f;
}

}  // namespace acsim::policy
