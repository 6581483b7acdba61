#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "triplescore/types.hpp"

namespace triplescore {

struct Vocabulary {
    std::vector<std::string> tokens;               // index -> token
    std::unordered_map<std::string, std::size_t> index;  // token -> index
    std::vector<std::int64_t> df;                  // per retained token
    std::size_t n_docs = 0;

    bool contains(const std::string& tok) const { return index.count(tok) > 0; }
    std::size_t size() const { return tokens.size(); }
    // idf(w) = ln((1+N)/(1+df)) + 1
    double idf(std::size_t token_index) const;
};

using TextMap = std::map<PersonId, TokenCounts>;

// Tokens ranked by total corpus frequency descending, ties broken
// lexicographically; top `cap` kept. df counted over person-documents.
Vocabulary build_vocabulary(const TextMap& texts, std::size_t cap);

struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;  // sorted by index

    double norm() const;
};

// tf x idf per in-vocab token, L2 normalized. All-out-of-vocab -> zero vector.
SparseVector tfidf_vector(const TokenCounts& doc, const Vocabulary& vocab);

// Unnormalized corpus-level weights: total corpus count x idf.
using TfIdfWeights = std::unordered_map<std::string, double>;
TfIdfWeights corpus_weights(const TextMap& texts, const Vocabulary& vocab);

struct CandidatePools {
    // Per type: persons with only that type / persons lacking that type.
    std::map<TypeId, std::vector<PersonId>> positives;
    std::map<TypeId, std::vector<PersonId>> negatives;
};

CandidatePools build_candidate_pools(const std::vector<KbAssertion>& kb);

struct LabeledPerson {
    PersonId person;
    bool positive = false;
};

using SampledExamples = std::map<TypeId, std::vector<LabeledPerson>>;

// Popularity bucket index: floor(log2 p) for p >= 1; p = 0 never sampled.
int popularity_bucket(std::int64_t popularity);

struct SampleOptions {
    std::size_t bucket_cap = 100;  // max positives per bucket
    std::uint64_t seed = 0;
    // Optional sink for degraded buckets (fewer negatives than positives).
    std::function<void(const std::string&)> log;
};

SampledExamples sample_examples(const CandidatePools& pools,
                                const std::map<PersonId, std::int64_t>& popularity,
                                const SampleOptions& opts);

}  // namespace triplescore
