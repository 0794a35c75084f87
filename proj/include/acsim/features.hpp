#pragma once

#include <string>
#include <vector>

#include "acsim/policy.hpp"

namespace acsim::policy {

/// State descriptions used by the learning policies. Each version extends the
/// previous one; the arrival rate and the UE-type one-hot always come last.
///
///   1: occupied fraction of the candidate cell
///   2: + resource fraction requested by the arriving UE
///   3: + occupied fraction of the six other cells, in cell-index order
///   4: + mean channel rate of the UEs in the candidate cell (0 if empty)
std::vector<double> featurize(int version, const DecisionContext& ctx);

/// Length of the vector produced by `featurize`.
int feature_length(int version, int num_types);

/// Number of leading entries that depend on the version (everything but the
/// rate/type tail).
int feature_head_length(int version);

enum class FeatureKind { Load, Demand, Quality, Rate, TypeFlag };

/// Kind of every entry of a version's feature vector.
std::vector<FeatureKind> feature_kinds(int version, int num_types);

}  // namespace acsim::policy
