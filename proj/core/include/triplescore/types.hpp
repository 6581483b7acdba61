#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace triplescore {

using PersonId = std::string;
using TypeId = std::string;
using EntityId = std::string;
using RelationId = std::string;

enum class TargetRelation { profession, nationality };

inline const char* to_string(TargetRelation r) {
    return r == TargetRelation::profession ? "profession" : "nationality";
}

inline TargetRelation parse_relation(const std::string& s) {
    if (s == "profession") return TargetRelation::profession;
    if (s == "nationality") return TargetRelation::nationality;
    throw std::runtime_error("unknown relation: " + s);
}

struct Mention {
    PersonId person;
    std::size_t begin = 0;  // byte offsets into the sentence text
    std::size_t end = 0;
};

struct AnnotatedSentence {
    std::int64_t id = 0;
    std::string text;
    std::vector<Mention> mentions;
};

struct AnnotatedCorpus {
    std::vector<AnnotatedSentence> sentences;
};

// Token -> count. Ordered so that iteration order is deterministic.
using TokenCounts = std::map<std::string, std::int64_t>;

struct KbAssertion {
    PersonId person;
    TypeId type;

    bool operator==(const KbAssertion&) const = default;
    auto operator<=>(const KbAssertion&) const = default;
};

struct GoldTriple {
    KbAssertion assertion;
    int score = 0;  // 0..7
};

struct ScoredTriple {
    PersonId person;
    TypeId type;
    int score = 0;  // 0..7
};

enum class RawKind { probability, weighted_sum };

struct RawScore {
    double value = 0.0;
    RawKind kind = RawKind::probability;
};

// Scorers abstain by returning nullopt.
using MaybeRawScore = std::optional<RawScore>;

enum class ScorerKind { word_classification, word_counting, word_mle, path_ranking };

inline const char* to_string(ScorerKind k) {
    switch (k) {
        case ScorerKind::word_classification: return "wordclass";
        case ScorerKind::word_counting: return "wordcount";
        case ScorerKind::word_mle: return "wordmle";
        case ScorerKind::path_ranking: return "pathrank";
    }
    return "?";
}

inline ScorerKind parse_scorer(const std::string& s) {
    if (s == "wordclass") return ScorerKind::word_classification;
    if (s == "wordcount") return ScorerKind::word_counting;
    if (s == "wordmle") return ScorerKind::word_mle;
    if (s == "pathrank") return ScorerKind::path_ranking;
    throw std::runtime_error("unknown scorer: " + s);
}

constexpr int kMinScore = 0;
constexpr int kMaxScore = 7;

}  // namespace triplescore
