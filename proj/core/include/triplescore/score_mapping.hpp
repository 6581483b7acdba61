#pragma once

#include <map>
#include <string>

#include "triplescore/types.hpp"

namespace triplescore {

enum class MappingStrategy { maplin, maplog, mapscale };

const char* to_string(MappingStrategy m);
MappingStrategy parse_mapping(const std::string& s);

// floor((s / s_max) * 7), clamped to [0,7]; s_max = 0 -> 0.
int map_linear(double s, double s_max);

// floor(max(0, log2((s / s_max) * 2^7))); s = 0 or s_max = 0 -> 0.
int map_log(double s, double s_max);

// floor(s * 8 - 1e-4) clamped to [0,7]; s must be a probability.
int map_scale(double s);

int apply_mapping(MappingStrategy strategy, const RawScore& raw, double s_max);

// (scorer, relation) -> strategy; defaults per the tuned table, overridable.
class MappingTable {
public:
    static MappingTable defaults();

    MappingStrategy get(ScorerKind scorer, TargetRelation relation) const;
    void set(ScorerKind scorer, TargetRelation relation, MappingStrategy m);

private:
    std::map<std::pair<int, int>, MappingStrategy> table_;
};

}  // namespace triplescore
