#include "triplescore/features.hpp"

#include <algorithm>
#include <cmath>

#include "triplescore/rng.hpp"

namespace triplescore {

double Vocabulary::idf(std::size_t token_index) const {
    return std::log((1.0 + static_cast<double>(n_docs)) /
                    (1.0 + static_cast<double>(df[token_index]))) +
           1.0;
}

Vocabulary build_vocabulary(const TextMap& texts, std::size_t cap) {
    std::map<std::string, std::int64_t> freq;
    std::map<std::string, std::int64_t> df;
    for (const auto& [person, counts] : texts) {
        for (const auto& [tok, c] : counts) {
            freq[tok] += c;
            df[tok] += 1;
        }
    }
    std::vector<const std::string*> ranked;
    ranked.reserve(freq.size());
    for (const auto& [tok, f] : freq) ranked.push_back(&tok);
    // freq descending, lexicographic ascending on ties; the map iteration
    // order already gives the lexicographic tie-break with stable_sort
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const std::string* a, const std::string* b) {
                         return freq.at(*a) > freq.at(*b);
                     });
    if (ranked.size() > cap) ranked.resize(cap);

    Vocabulary vocab;
    vocab.n_docs = texts.size();
    vocab.tokens.reserve(ranked.size());
    vocab.df.reserve(ranked.size());
    for (const std::string* tok : ranked) {
        vocab.index.emplace(*tok, vocab.tokens.size());
        vocab.tokens.push_back(*tok);
        vocab.df.push_back(df.at(*tok));
    }
    return vocab;
}

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += v * v;
    return std::sqrt(s);
}

SparseVector tfidf_vector(const TokenCounts& doc, const Vocabulary& vocab) {
    SparseVector vec;
    for (const auto& [tok, c] : doc) {
        auto it = vocab.index.find(tok);
        if (it == vocab.index.end()) continue;
        vec.entries.emplace_back(it->second, static_cast<double>(c) * vocab.idf(it->second));
    }
    std::sort(vec.entries.begin(), vec.entries.end());
    double n = vec.norm();
    if (n > 0.0)
        for (auto& [i, v] : vec.entries) v /= n;
    return vec;
}

TfIdfWeights corpus_weights(const TextMap& texts, const Vocabulary& vocab) {
    std::vector<std::int64_t> totals(vocab.size(), 0);
    for (const auto& [person, counts] : texts)
        for (const auto& [tok, c] : counts) {
            auto it = vocab.index.find(tok);
            if (it != vocab.index.end()) totals[it->second] += c;
        }
    TfIdfWeights weights;
    weights.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i)
        weights.emplace(vocab.tokens[i], static_cast<double>(totals[i]) * vocab.idf(i));
    return weights;
}

CandidatePools build_candidate_pools(const std::vector<KbAssertion>& kb) {
    std::map<PersonId, std::set<TypeId>> person_types;
    std::set<TypeId> types;
    for (const auto& a : kb) {
        person_types[a.person].insert(a.type);
        types.insert(a.type);
    }
    CandidatePools pools;
    for (const auto& t : types) {
        auto& pos = pools.positives[t];
        auto& neg = pools.negatives[t];
        for (const auto& [p, ts] : person_types) {
            if (ts.size() == 1 && *ts.begin() == t)
                pos.push_back(p);
            else if (!ts.count(t))
                neg.push_back(p);
        }
    }
    return pools;
}

int popularity_bucket(std::int64_t popularity) {
    if (popularity < 1) return -1;
    int i = 0;
    while ((std::int64_t{1} << (i + 1)) <= popularity) ++i;
    return i;
}

SampledExamples sample_examples(const CandidatePools& pools,
                                const std::map<PersonId, std::int64_t>& popularity,
                                const SampleOptions& opts) {
    auto pop_of = [&](const PersonId& p) -> std::int64_t {
        auto it = popularity.find(p);
        return it == popularity.end() ? 0 : it->second;
    };

    SampledExamples out;
    for (const auto& [type, pos_pool] : pools.positives) {
        auto rng = make_rng(derive_seed(opts.seed, "sample:" + type));
        std::map<int, std::vector<PersonId>> pos_buckets, neg_buckets;
        for (const auto& p : pos_pool) {
            int b = popularity_bucket(pop_of(p));
            if (b >= 0) pos_buckets[b].push_back(p);
        }
        auto neg_it = pools.negatives.find(type);
        if (neg_it != pools.negatives.end())
            for (const auto& p : neg_it->second) {
                int b = popularity_bucket(pop_of(p));
                if (b >= 0) neg_buckets[b].push_back(p);
            }

        auto& examples = out[type];
        for (auto& [bucket, positives] : pos_buckets) {
            auto& negatives = neg_buckets[bucket];
            std::size_t n_pos = std::min(opts.bucket_cap, positives.size());
            if (negatives.size() < n_pos) {
                if (opts.log)
                    opts.log("type " + type + " bucket " + std::to_string(bucket) + ": only " +
                             std::to_string(negatives.size()) + " negatives for " +
                             std::to_string(n_pos) + " positives, reducing draw");
                n_pos = negatives.size();
            }
            if (n_pos == 0) continue;
            for (auto i : sample_without_replacement(positives.size(), n_pos, rng))
                examples.push_back({positives[i], true});
            for (auto i : sample_without_replacement(negatives.size(), n_pos, rng))
                examples.push_back({negatives[i], false});
        }
    }
    return out;
}

}  // namespace triplescore
