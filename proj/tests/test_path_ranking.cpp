#include <doctest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"
#include "triplescore/path_ranking.hpp"

using namespace triplescore;

namespace {

// Brute-force simple-path enumerator matching the documented semantics.
void oracle_dfs(const std::vector<KgTriple>& triples, const EntityId& cur, const EntityId& head,
                const EntityId& tail, int max_len, bool allow_inverse, PathType& prefix,
                std::set<EntityId>& visited, PathFeatureVector& out) {
    if (static_cast<int>(prefix.size()) >= max_len) return;
    for (const auto& t : triples) {
        struct Hop {
            EntityId next;
            PathStep step;
        };
        std::vector<Hop> hops;
        if (t.head == cur) hops.push_back({t.tail, {t.relation, true}});
        if (allow_inverse && t.tail == cur) hops.push_back({t.head, {t.relation, false}});
        for (const auto& h : hops) {
            if (h.next == tail) {
                prefix.push_back(h.step);
                out[prefix] += 1;
                prefix.pop_back();
                continue;
            }
            if (h.next == head || visited.count(h.next)) continue;
            visited.insert(h.next);
            prefix.push_back(h.step);
            oracle_dfs(triples, h.next, head, tail, max_len, allow_inverse, prefix, visited, out);
            prefix.pop_back();
            visited.erase(h.next);
        }
    }
}

PathFeatureVector oracle_paths(const std::vector<KgTriple>& triples, const EntityId& head,
                               const EntityId& tail, int max_len, bool allow_inverse) {
    PathFeatureVector out;
    PathType prefix;
    std::set<EntityId> visited;
    oracle_dfs(triples, head, head, tail, max_len, allow_inverse, prefix, visited, out);
    return out;
}

// O(n^2) pairwise AUC with half-credit ties.
double auc_oracle(const std::vector<std::pair<double, bool>>& scores) {
    double wins = 0.0;
    std::size_t n_pairs = 0;
    for (const auto& [sp, lp] : scores)
        for (const auto& [sn, ln] : scores) {
            if (!lp || ln) continue;
            ++n_pairs;
            if (sp > sn)
                wins += 1.0;
            else if (sp == sn)
                wins += 0.5;
        }
    return wins / n_pairs;
}

}  // namespace

TEST_CASE("KbGraph: dedup, adjacency, degree") {
    std::vector<KgTriple> triples{{"a", "r", "b"}, {"a", "r", "b"}, {"b", "s", "c"},
                                  {"a", "t", "c"}};
    KbGraph g(triples);
    CHECK(g.n_edges() == 3);  // duplicate collapsed
    CHECK(g.has_entity("a"));
    CHECK_FALSE(g.has_entity("z"));
    CHECK(g.has_edge("a", "r", "b"));
    CHECK_FALSE(g.has_edge("b", "r", "a"));
    CHECK(g.degree("a") == 2);
    CHECK(g.degree("b") == 2);  // in r + out s
    CHECK(g.degree("c") == 2);
    CHECK(g.degree("missing") == 0);
    CHECK(g.forward(*g.entity("a")).size() == 2);
    CHECK(g.inverse(*g.entity("c")).size() == 2);
    CHECK(std::is_sorted(g.forward(*g.entity("a")).begin(), g.forward(*g.entity("a")).end()));
}

TEST_CASE("path type encoding round trips") {
    PathType p{{"worksAs", true}, {"locatedIn", false}, {"r", true}};
    CHECK(encode_path_type(p) == "+worksAs|-locatedIn|+r");
    CHECK(decode_path_type("+worksAs|-locatedIn|+r") == p);
    CHECK(decode_path_type(encode_path_type({})) == PathType{});
    CHECK_THROWS(decode_path_type("worksAs"));  // missing direction
}

TEST_CASE("extract_paths hand example") {
    // head -r-> m -s-> tail, head -q-> tail, tail -u-> head (inverse usable)
    std::vector<KgTriple> triples{
        {"head", "r", "m"}, {"m", "s", "tail"}, {"head", "q", "tail"}, {"tail", "u", "head"}};
    KbGraph g(triples);
    auto paths = extract_paths(g, "head", "tail", 3, true);

    CHECK(paths.at({{"q", true}}) == 1);
    CHECK(paths.at({{"u", false}}) == 1);
    CHECK(paths.at({{"r", true}, {"s", true}}) == 1);
    // no path may revisit head as an intermediate, so q then u-forward-back is absent
    for (const auto& [pt, c] : paths) CHECK(pt.size() <= 3);

    // inverse disabled removes the -u path
    auto no_inv = extract_paths(g, "head", "tail", 3, false);
    CHECK(no_inv.count({{"u", false}}) == 0);
    CHECK(no_inv.at({{"q", true}}) == 1);

    // length cap
    auto len1 = extract_paths(g, "head", "tail", 1, true);
    CHECK(len1.count({{"r", true}, {"s", true}}) == 0);
    CHECK(len1.at({{"q", true}}) == 1);

    // unknown endpoints -> empty
    CHECK(extract_paths(g, "nope", "tail").empty());
    CHECK(extract_paths(g, "head", "nope").empty());
}

TEST_CASE("extract_paths matches the brute-force oracle on random graphs") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> ents{"e0", "e1", "e2", "e3", "e4", "e5"};
    const std::vector<std::string> rels{"r", "s", "t"};
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<KgTriple> triples;
        std::size_t n = 3 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i)
            triples.push_back({ents[rng() % ents.size()], rels[rng() % rels.size()],
                               ents[rng() % ents.size()]});
        // dedup like the graph does, so the oracle counts each edge once
        std::sort(triples.begin(), triples.end(), [](const auto& a, const auto& b) {
            return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
        });
        triples.erase(std::unique(triples.begin(), triples.end(),
                                  [](const auto& a, const auto& b) {
                                      return a.head == b.head && a.relation == b.relation &&
                                             a.tail == b.tail;
                                  }),
                      triples.end());
        KbGraph g(triples);
        EntityId head = ents[rng() % ents.size()], tail = ents[rng() % ents.size()];
        if (head == tail) continue;
        for (int max_len : {1, 2, 3})
            for (bool inv : {false, true}) {
                auto got = extract_paths(g, head, tail, max_len, inv);
                auto want = oracle_paths(triples, head, tail, max_len, inv);
                CHECK(got == want);
            }
    }
}

TEST_CASE("compute_auc matches the pairwise oracle") {
    std::vector<std::pair<double, bool>> hand{{0.9, true}, {0.8, true}, {0.3, false},
                                              {0.1, false}};
    CHECK(compute_auc(hand) == doctest::Approx(1.0));
    CHECK(compute_auc({{0.5, true}, {0.5, false}}) == doctest::Approx(0.5));
    CHECK(compute_auc({{0.2, true}, {0.8, false}}) == doctest::Approx(0.0));
    CHECK_THROWS(compute_auc({{0.5, true}}));
    CHECK_THROWS(compute_auc({}));

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<double, bool>> scores;
        std::size_t n = 2 + rng() % 20;
        for (std::size_t i = 0; i < n; ++i)
            scores.push_back({std::round(unit(rng) * 4) / 4.0, rng() % 2 == 0});
        bool has_pos = false, has_neg = false;
        for (auto& [s, l] : scores) (l ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;
        CHECK(compute_auc(scores) == doctest::Approx(auc_oracle(scores)));
    }
}

namespace {

// KG where type membership is betrayed by a perfect length-2 pattern:
// person -memberOf-> guild_T -guildOf-> T, plus the target edges themselves.
struct PatternWorld {
    std::vector<KgTriple> triples;
    std::vector<KbAssertion> kb;
    std::set<TypeId> types{"T0", "T1", "T2"};

    explicit PatternWorld(int per_type = 8) {
        int p = 0;
        for (const auto& t : types) {
            triples.push_back({"guild_" + t, "guildOf", t});
            for (int i = 0; i < per_type; ++i, ++p) {
                PersonId person = "p" + std::to_string(p);
                triples.push_back({person, "worksAs", t});
                triples.push_back({person, "memberOf", "guild_" + t});
                kb.push_back({person, t});
            }
        }
    }
};

}  // namespace

TEST_CASE("make_training_pairs: balanced, degree-ranked, deterministic") {
    PatternWorld w;
    KbGraph g(w.triples);
    TrainingPairOptions opts;
    opts.seed = 3;
    auto pairs = make_training_pairs(g, w.kb, "worksAs", w.types, opts);

    std::size_t pos = 0, neg = 0;
    for (const auto& pr : pairs) {
        (pr.positive ? pos : neg) += 1;
        if (pr.positive) {
            CHECK(g.has_edge(pr.head, "worksAs", pr.tail));
        } else {
            CHECK_FALSE(g.has_edge(pr.head, "worksAs", pr.tail));
            // negative type also absent from the task KB for that person
            for (const auto& a : w.kb)
                if (a.person == pr.head) CHECK(a.type != pr.tail);
        }
    }
    CHECK(pos == w.kb.size());
    CHECK(pos == neg);

    auto again = make_training_pairs(g, w.kb, "worksAs", w.types, opts);
    REQUIRE(pairs.size() == again.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].head == again[i].head);
        CHECK(pairs[i].tail == again[i].tail);
        CHECK(pairs[i].positive == again[i].positive);
    }

    // top_n restricts to the highest-degree persons
    opts.top_n = 4;
    auto top = make_training_pairs(g, w.kb, "worksAs", w.types, opts);
    std::set<PersonId> heads;
    for (const auto& pr : top) heads.insert(pr.head);
    CHECK(heads.size() <= 4);
}

TEST_CASE("make_training_pairs skips persons with no alternative type") {
    // one type only: no negative can be drawn
    std::vector<KgTriple> triples{{"p0", "worksAs", "T0"}};
    KbGraph g(triples);
    int logged = 0;
    TrainingPairOptions opts;
    opts.log = [&](const std::string&) { ++logged; };
    auto pairs = make_training_pairs(g, {{"p0", "T0"}}, "worksAs", {"T0"}, opts);
    CHECK(pairs.empty());
    CHECK(logged == 1);
}

TEST_CASE("train_forest learns the planted pattern") {
    PatternWorld w;
    KbGraph g(w.triples);
    TrainingPairOptions popts;
    popts.seed = 11;
    auto pairs = make_training_pairs(g, w.kb, "worksAs", w.types, popts);

    ForestTrainOptions fopts;
    fopts.n_trees = 30;
    fopts.seed = 11;
    auto model = train_forest(pairs, g, fopts);
    CHECK(model.trees.size() == 30);
    CHECK(model.validation_auc > 0.9);
    CHECK(!model.feature_names.empty());

    // the memberOf/guildOf path type must be among the features
    bool found = false;
    for (const auto& f : model.feature_names)
        if (f == "+memberOf|+guildOf") found = true;
    CHECK(found);

    // positives score above negatives
    double pos_min = 1.0, neg_max = 0.0;
    for (const auto& pr : pairs) {
        double s = model.predict(extract_paths(g, pr.head, pr.tail, model.max_path_len,
                                               model.allow_inverse));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        if (pr.positive)
            pos_min = std::min(pos_min, s);
        else
            neg_max = std::max(neg_max, s);
    }
    CHECK(pos_min > neg_max);

    // determinism
    auto model2 = train_forest(pairs, g, fopts);
    CHECK(model2.validation_auc == model.validation_auc);
    for (const auto& pr : pairs) {
        auto feats = extract_paths(g, pr.head, pr.tail, 3, true);
        CHECK(model.predict(feats) == model2.predict(feats));
    }
}

TEST_CASE("score_path_ranking: profession KB filter and abstention") {
    PatternWorld w;
    KbGraph g(w.triples);
    TrainingPairOptions popts;
    popts.seed = 2;
    auto pairs = make_training_pairs(g, w.kb, "worksAs", w.types, popts);
    ForestTrainOptions fopts;
    fopts.n_trees = 15;
    fopts.seed = 2;
    auto model = train_forest(pairs, g, fopts);

    std::map<PersonId, int> counts;  // every person has 1 KB profession here
    for (const auto& a : w.kb) counts[a.person] += 1;

    // profession with min_professions = 4: everyone abstains
    CHECK_FALSE(score_path_ranking(model, g, "p0", "T0", TargetRelation::profession, counts, 4));
    // min_professions = 1 scores normally
    auto s = score_path_ranking(model, g, "p0", "T0", TargetRelation::profession, counts, 1);
    REQUIRE(s);
    CHECK(s->kind == RawKind::probability);
    auto s_neg = score_path_ranking(model, g, "p0", "T1", TargetRelation::profession, counts, 1);
    REQUIRE(s_neg);
    CHECK(s->value > s_neg->value);

    // nationality ignores the filter
    CHECK(score_path_ranking(model, g, "p0", "T0", TargetRelation::nationality, counts, 4));

    // person absent from the graph abstains
    CHECK_FALSE(score_path_ranking(model, g, "ghost", "T0", TargetRelation::nationality, counts, 1));
}

TEST_CASE("forest model file round trip") {
    PatternWorld w(5);
    KbGraph g(w.triples);
    TrainingPairOptions popts;
    popts.seed = 8;
    auto pairs = make_training_pairs(g, w.kb, "worksAs", w.types, popts);
    ForestTrainOptions fopts;
    fopts.n_trees = 10;
    fopts.seed = 8;
    auto model = train_forest(pairs, g, fopts);

    testutil::TempDir tmp("forest");
    save_forest_model(tmp.file("forest.txt"), model);
    auto back = load_forest_model(tmp.file("forest.txt"));
    CHECK(back.feature_names == model.feature_names);
    CHECK(back.trees.size() == model.trees.size());
    CHECK(back.validation_auc == doctest::Approx(model.validation_auc));
    for (const auto& pr : pairs) {
        auto feats = extract_paths(g, pr.head, pr.tail, 3, true);
        CHECK(back.predict(feats) == doctest::Approx(model.predict(feats)));
    }
    CHECK_THROWS(load_forest_model(tmp.file("missing.txt")));
}
