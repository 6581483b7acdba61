#include <doctest.h>

#include <cmath>
#include <random>

#include "triplescore/features.hpp"

using namespace triplescore;

namespace {

TextMap two_doc_corpus() {
    return {{"doc1", {{"a", 3}, {"b", 1}}}, {"doc2", {{"a", 1}, {"c", 5}}}};
}

}  // namespace

TEST_CASE("build_vocabulary ranks by frequency, ties lexicographic") {
    auto vocab = build_vocabulary(two_doc_corpus(), 2);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.tokens[0] == "c");  // freq 5
    CHECK(vocab.tokens[1] == "a");  // freq 4
    CHECK(vocab.df[1] == 2);
    CHECK(vocab.n_docs == 2);

    // cap >= distinct tokens keeps all
    CHECK(build_vocabulary(two_doc_corpus(), 100).size() == 3);

    // tie at equal frequency: lexicographically smaller first
    TextMap tied{{"d", {{"zz", 4}, {"aa", 4}}}};
    auto v2 = build_vocabulary(tied, 1);
    CHECK(v2.tokens[0] == "aa");

    CHECK(build_vocabulary({}, 5).size() == 0);
}

TEST_CASE("vocabulary cap equals truncation of the uncapped ranking") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ndocs(1, 6), ntok(1, 8), count(1, 9);
    for (int trial = 0; trial < 30; ++trial) {
        TextMap texts;
        int docs = ndocs(rng);
        for (int d = 0; d < docs; ++d) {
            TokenCounts counts;
            int toks = ntok(rng);
            for (int t = 0; t < toks; ++t)
                counts["tok" + std::to_string(rng() % 12)] += count(rng);
            texts["doc" + std::to_string(d)] = counts;
        }
        auto full = build_vocabulary(texts, 1000000);
        std::size_t cap = 1 + rng() % 6;
        auto capped = build_vocabulary(texts, cap);
        std::vector<std::string> truncated(full.tokens.begin(),
                                           full.tokens.begin() +
                                               std::min(cap, full.tokens.size()));
        CHECK(capped.tokens == truncated);
    }
}

TEST_CASE("tfidf_vector matches the stated idf formula and normalizes") {
    // doc {a:2,b:1}, N=2, df(a)=2, df(b)=1
    auto vocab = build_vocabulary(two_doc_corpus(), 10);
    TokenCounts doc{{"a", 2}, {"b", 1}};
    auto vec = tfidf_vector(doc, vocab);
    REQUIRE(vec.entries.size() == 2);
    double idf_a = std::log(3.0 / 3.0) + 1.0;
    double idf_b = std::log(3.0 / 2.0) + 1.0;
    double norm = std::hypot(2.0 * idf_a, 1.0 * idf_b);
    for (const auto& [i, v] : vec.entries) {
        if (vocab.tokens[i] == "a") CHECK(v == doctest::Approx(2.0 * idf_a / norm));
        if (vocab.tokens[i] == "b") CHECK(v == doctest::Approx(1.0 * idf_b / norm));
    }
    CHECK(vec.entries[0].second == doctest::Approx(0.818).epsilon(1e-3));

    // single in-vocab token -> unit coordinate
    auto unit = tfidf_vector({{"c", 4}}, vocab);
    REQUIRE(unit.entries.size() == 1);
    CHECK(unit.entries[0].second == doctest::Approx(1.0));

    CHECK(tfidf_vector({}, vocab).entries.empty());
    CHECK(tfidf_vector({{"unseen", 3}}, vocab).entries.empty());
}

TEST_CASE("tfidf_vector norm is 1 or 0") {
    std::mt19937_64 rng(3);
    auto vocab = build_vocabulary(two_doc_corpus(), 10);
    for (int trial = 0; trial < 50; ++trial) {
        TokenCounts doc;
        for (const char* t : {"a", "b", "c", "zz"})
            if (rng() & 1) doc[t] = 1 + static_cast<std::int64_t>(rng() % 5);
        double n = tfidf_vector(doc, vocab).norm();
        CHECK((std::abs(n - 1.0) < 1e-12 || n == 0.0));
    }
}

TEST_CASE("corpus_weights: total count times idf, unnormalized") {
    TextMap texts{{"d1", {{"w", 1}, {"x", 4}}}, {"d2", {{"w", 2}}}, {"d3", {{"w", 5}}}};
    auto vocab = build_vocabulary(texts, 10);
    auto weights = corpus_weights(texts, vocab);
    // w in every document: idf = ln(4/4)+1 = 1, weight = corpus count 8
    CHECK(weights.at("w") == doctest::Approx(8.0));
    // x in 1 of 3 docs with count 4: 4 * (ln(4/2)+1)
    CHECK(weights.at("x") == doctest::Approx(4.0 * (std::log(2.0) + 1.0)));
    CHECK(weights.at("x") == doctest::Approx(6.773).epsilon(1e-3));
    CHECK(weights.find("absent") == weights.end());
}

TEST_CASE("popularity_bucket equals direct interval membership") {
    for (std::int64_t p = 1; p <= 5000; ++p) {
        int i = popularity_bucket(p);
        CHECK((std::int64_t{1} << i) <= p);
        CHECK(p < (std::int64_t{1} << (i + 1)));
    }
    CHECK(popularity_bucket(0) == -1);
}

TEST_CASE("build_candidate_pools: only-type positives, lacking-type negatives") {
    std::vector<KbAssertion> kb{{"p1", "Actor"}, {"p2", "Actor"}, {"p2", "Farmer"},
                                {"p3", "Farmer"}};
    auto pools = build_candidate_pools(kb);
    CHECK(pools.positives.at("Actor") == std::vector<PersonId>{"p1"});
    CHECK(pools.negatives.at("Actor") == std::vector<PersonId>{"p3"});
    CHECK(pools.positives.at("Farmer") == std::vector<PersonId>{"p3"});
    CHECK(pools.negatives.at("Farmer") == std::vector<PersonId>{"p1"});
}

namespace {

CandidatePools pool_of(std::size_t n_pos, std::size_t n_neg) {
    CandidatePools pools;
    for (std::size_t i = 0; i < n_pos; ++i)
        pools.positives["T"].push_back("pos" + std::to_string(i));
    for (std::size_t i = 0; i < n_neg; ++i)
        pools.negatives["T"].push_back("neg" + std::to_string(i));
    return pools;
}

std::map<PersonId, std::int64_t> uniform_popularity(const CandidatePools& pools,
                                                    std::int64_t pop) {
    std::map<PersonId, std::int64_t> out;
    for (const auto& [t, v] : pools.positives)
        for (const auto& p : v) out[p] = pop;
    for (const auto& [t, v] : pools.negatives)
        for (const auto& p : v) out[p] = pop;
    return out;
}

}  // namespace

TEST_CASE("sample_examples: bucket caps and balance") {
    SampleOptions opts;
    opts.seed = 42;

    // 40 positives, 500 negatives in one bucket -> take all 40 + 40
    auto pools = pool_of(40, 500);
    auto ex = sample_examples(pools, uniform_popularity(pools, 3), opts);
    std::size_t pos = 0, neg = 0;
    for (const auto& e : ex.at("T")) (e.positive ? pos : neg) += 1;
    CHECK(pos == 40);
    CHECK(neg == 40);

    // 300 positives -> exactly 100 sampled
    pools = pool_of(300, 1000);
    ex = sample_examples(pools, uniform_popularity(pools, 3), opts);
    pos = neg = 0;
    for (const auto& e : ex.at("T")) (e.positive ? pos : neg) += 1;
    CHECK(pos == 100);
    CHECK(neg == 100);

    // determinism
    auto again = sample_examples(pools, uniform_popularity(pools, 3), opts);
    CHECK(ex.at("T").size() == again.at("T").size());
    for (std::size_t i = 0; i < ex.at("T").size(); ++i) {
        CHECK(ex.at("T")[i].person == again.at("T")[i].person);
        CHECK(ex.at("T")[i].positive == again.at("T")[i].positive);
    }
}

TEST_CASE("sample_examples degrades gracefully when negatives run short") {
    auto pools = pool_of(50, 10);
    SampleOptions opts;
    opts.seed = 1;
    int logged = 0;
    opts.log = [&](const std::string&) { ++logged; };
    auto ex = sample_examples(pools, uniform_popularity(pools, 5), opts);
    std::size_t pos = 0, neg = 0;
    for (const auto& e : ex.at("T")) (e.positive ? pos : neg) += 1;
    CHECK(pos == 10);
    CHECK(neg == 10);
    CHECK(logged == 1);
}

TEST_CASE("sample_examples: balance holds per bucket on random pools") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        CandidatePools pools;
        std::map<PersonId, std::int64_t> popularity;
        for (int i = 0; i < 60; ++i) {
            PersonId p = "p" + std::to_string(i);
            bool positive = rng() % 3 == 0;
            (positive ? pools.positives["T"] : pools.negatives["T"]).push_back(p);
            popularity[p] = static_cast<std::int64_t>(rng() % 40);  // 0 keeps some unsampled
        }
        SampleOptions opts;
        opts.seed = rng();
        opts.bucket_cap = 1 + rng() % 8;
        auto ex = sample_examples(pools, popularity, opts);
        std::map<int, std::pair<int, int>> per_bucket;
        for (const auto& e : ex["T"]) {
            int b = popularity_bucket(popularity.at(e.person));
            CHECK(b >= 0);  // popularity-0 persons never sampled
            auto& [p, n] = per_bucket[b];
            (e.positive ? p : n) += 1;
        }
        for (const auto& [b, pn] : per_bucket) {
            CHECK(pn.first == pn.second);
            CHECK(pn.first <= static_cast<int>(opts.bucket_cap));
        }
    }
}
