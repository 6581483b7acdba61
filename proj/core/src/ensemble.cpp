#include "triplescore/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace triplescore {

int combine(const TripleScoreVector& vec, const EnsembleWeights& weights) {
    double weight_sum = 0.0;
    double weighted = 0.0;
    std::size_t participating = 0;
    int lo = kMaxScore, hi = kMinScore;
    for (const auto& [scorer, score] : vec.scores) {
        if (!score) continue;
        if (*score < kMinScore || *score > kMaxScore)
            throw std::runtime_error("combine: score out of range");
        auto it = weights.acc.find(scorer);
        if (it == weights.acc.end())
            throw std::runtime_error(std::string("combine: no weight for scorer ") +
                                     to_string(scorer));
        weight_sum += it->second;
        weighted += it->second * *score;
        lo = std::min(lo, *score);
        hi = std::max(hi, *score);
        ++participating;
    }
    if (participating == 0) return 0;
    if (weight_sum <= 0.0) throw std::runtime_error("combine: zero total weight");
    // The exact average lies in [lo, hi]; clamping absorbs fp division error
    // (all-equal inputs must survive the floor).
    return std::clamp(static_cast<int>(std::floor(weighted / weight_sum)), lo, hi);
}

EnsembleWeights derive_weights(const DevScores& dev, int acc_threshold) {
    EnsembleWeights w;
    bool any_positive = false;
    for (const auto& [scorer, pairs] : dev) {
        if (pairs.empty())
            throw std::runtime_error(std::string("derive_weights: empty dev set for ") +
                                     to_string(scorer));
        std::size_t hits = 0;
        for (const auto& [pred, gold] : pairs)
            if (std::abs(pred - gold) <= acc_threshold) ++hits;
        double acc = static_cast<double>(hits) / static_cast<double>(pairs.size());
        w.acc[scorer] = acc;
        if (acc > 0.0) any_positive = true;
    }
    if (!any_positive) throw std::runtime_error("derive_weights: every scorer has ACC 0");
    return w;
}

}  // namespace triplescore
