#include "triplescore/score_mapping.hpp"

#include <cmath>
#include <stdexcept>

namespace triplescore {

namespace {
int clamp_score(double floored) {
    if (floored < kMinScore) return kMinScore;
    if (floored > kMaxScore) return kMaxScore;
    return static_cast<int>(floored);
}
}  // namespace

const char* to_string(MappingStrategy m) {
    switch (m) {
        case MappingStrategy::maplin: return "maplin";
        case MappingStrategy::maplog: return "maplog";
        case MappingStrategy::mapscale: return "mapscale";
    }
    return "?";
}

MappingStrategy parse_mapping(const std::string& s) {
    if (s == "maplin") return MappingStrategy::maplin;
    if (s == "maplog") return MappingStrategy::maplog;
    if (s == "mapscale") return MappingStrategy::mapscale;
    throw std::runtime_error("unknown mapping strategy: " + s);
}

int map_linear(double s, double s_max) {
    if (s < 0.0 || s_max < 0.0) throw std::runtime_error("map_linear: negative input");
    if (s > s_max) throw std::runtime_error("map_linear: s > s_max");
    if (s_max == 0.0) return 0;
    return clamp_score(std::floor(s / s_max * 7.0));
}

int map_log(double s, double s_max) {
    if (s < 0.0 || s_max < 0.0) throw std::runtime_error("map_log: negative input");
    if (s > s_max) throw std::runtime_error("map_log: s > s_max");
    if (s == 0.0 || s_max == 0.0) return 0;
    double v = std::log2(s / s_max * 128.0);
    return clamp_score(std::floor(std::max(0.0, v)));
}

int map_scale(double s) {
    if (s < 0.0 || s > 1.0) throw std::runtime_error("map_scale: s outside [0,1]");
    return clamp_score(std::floor(s * 8.0 - 1e-4));
}

int apply_mapping(MappingStrategy strategy, const RawScore& raw, double s_max) {
    switch (strategy) {
        case MappingStrategy::maplin: return map_linear(raw.value, s_max);
        case MappingStrategy::maplog: return map_log(raw.value, s_max);
        case MappingStrategy::mapscale:
            if (raw.kind != RawKind::probability)
                throw std::runtime_error("mapscale requires a probability score");
            return map_scale(raw.value);
    }
    throw std::runtime_error("unreachable");
}

MappingTable MappingTable::defaults() {
    using S = ScorerKind;
    using R = TargetRelation;
    using M = MappingStrategy;
    MappingTable t;
    t.set(S::word_classification, R::profession, M::mapscale);
    t.set(S::word_classification, R::nationality, M::maplog);
    t.set(S::word_counting, R::profession, M::maplin);
    t.set(S::word_counting, R::nationality, M::maplin);
    t.set(S::word_mle, R::profession, M::maplog);
    t.set(S::word_mle, R::nationality, M::maplog);
    t.set(S::path_ranking, R::profession, M::mapscale);
    t.set(S::path_ranking, R::nationality, M::maplog);
    return t;
}

MappingStrategy MappingTable::get(ScorerKind scorer, TargetRelation relation) const {
    return table_.at({static_cast<int>(scorer), static_cast<int>(relation)});
}

void MappingTable::set(ScorerKind scorer, TargetRelation relation, MappingStrategy m) {
    table_[{static_cast<int>(scorer), static_cast<int>(relation)}] = m;
}

}  // namespace triplescore
