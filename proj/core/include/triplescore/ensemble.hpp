#pragma once

#include <map>
#include <optional>

#include "triplescore/types.hpp"

namespace triplescore {

// Per relation, per scorer: dev-set ACC used as the (unnormalized) weight.
struct EnsembleWeights {
    std::map<ScorerKind, double> acc;  // for one relation
};

struct TripleScoreVector {
    PersonId person;
    TypeId type;
    std::map<ScorerKind, std::optional<int>> scores;  // nullopt = abstained
};

// Weighted average over the non-abstaining scorers, weights renormalized
// over that subset; floor of the sum. No participating scorer -> 0.
int combine(const TripleScoreVector& vec, const EnsembleWeights& weights);

// dev predictions/gold per scorer, keyed by (person, type).
using DevScores = std::map<ScorerKind, std::vector<std::pair<int, int>>>;  // (pred, gold)

// Stores each scorer's raw dev ACC (|pred - gold| <= acc_threshold).
EnsembleWeights derive_weights(const DevScores& dev, int acc_threshold = 2);

}  // namespace triplescore
