#include "triplescore/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "triplescore/rng.hpp"

namespace triplescore {

namespace {

void log_stderr(const std::string& msg) { std::cerr << "[triplescore] " << msg << '\n'; }

const TokenCounts& text_of(const TextMap& texts, const PersonId& p) {
    static const TokenCounts empty;
    auto it = texts.find(p);
    return it == texts.end() ? empty : it->second;
}

bool enabled(const RunConfig& rc, ScorerKind k) {
    return std::find(rc.scorers.begin(), rc.scorers.end(), k) != rc.scorers.end();
}

// stripe-partitioned worker pool; results land at fixed indexes, so output
// order never depends on the worker count
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& body) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    int n_workers = std::min<int>(jobs, static_cast<int>(n));
    workers.reserve(n_workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < n_workers; ++w)
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += n_workers) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

LoadedData load_inputs(const RunConfig& rc) {
    LoadedData data;
    std::set<std::string> stoplist;
    if (!rc.stoplist_path.empty()) stoplist = load_stoplist(rc.stoplist_path);

    if (!rc.sentences_path.empty()) {
        auto loaded = load_sentences(rc.sentences_path, stoplist);
        data.texts = std::move(loaded.associated_text);
        data.popularity = std::move(loaded.popularity);
    }
    if (!rc.kb_path.empty()) {
        data.kb = load_kb(rc.kb_path);
        std::map<PersonId, std::set<TypeId>> per_person;
        for (const auto& a : data.kb) {
            per_person[a.person].insert(a.type);
            data.type_universe.insert(a.type);
        }
        for (const auto& [p, types] : per_person)
            data.kb_type_counts[p] = static_cast<int>(types.size());
        data.pools = build_candidate_pools(data.kb);
    }
    if (!rc.kg_path.empty()) data.graph.emplace(load_kg_triples(rc.kg_path));
    if (!rc.descriptions_path.empty())
        data.descriptions = load_descriptions(rc.descriptions_path, log_stderr);
    if (!rc.gold_path.empty()) data.gold = load_gold(rc.gold_path);
    if (!rc.dev_gold_path.empty()) data.dev_gold = load_gold(rc.dev_gold_path);
    if (!rc.lexicon_path.empty()) data.lexicon = load_lexicon(rc.lexicon_path);
    if (!rc.abbreviations_path.empty())
        data.abbreviations = load_abbreviations(rc.abbreviations_path);
    return data;
}

TrainedModels train_models(const RunConfig& rc, const LoadedData& data) {
    TrainedModels models;
    if (enabled(rc, ScorerKind::word_classification)) {
        SampleOptions sopts;
        sopts.bucket_cap = rc.bucket_cap;
        sopts.seed = derive_seed(rc.seed, "wordclass");
        sopts.log = log_stderr;
        auto examples = sample_examples(data.pools, data.popularity, sopts);
        LogisticTrainOptions lopts;
        lopts.vocab_cap = rc.vocab_cap_class;
        lopts.seed = derive_seed(rc.seed, "wordclass:cv");
        lopts.log = log_stderr;
        models.logistic = train_word_classification(examples, data.texts, lopts);
    }
    if (enabled(rc, ScorerKind::word_counting))
        models.counting = build_counting_model(data.pools, data.texts, rc.vocab_cap_count);
    if (enabled(rc, ScorerKind::word_mle)) {
        Vocabulary vocab = build_vocabulary(data.texts, rc.vocab_cap_mle);
        MleBuildOptions mopts;
        mopts.pseudo_sample_size = rc.pseudo_sample_size;
        mopts.include_pseudo = rc.relation == TargetRelation::profession;
        mopts.seed = derive_seed(rc.seed, "wordmle");
        mopts.log = log_stderr;
        models.mle = build_mle_model(data.pools, data.texts, vocab, mopts);
    }
    if (enabled(rc, ScorerKind::path_ranking)) {
        if (!data.graph) throw std::runtime_error("path ranking enabled but corpus.kg not set");
        TrainingPairOptions popts;
        popts.top_n = rc.top_n;
        popts.seed = derive_seed(rc.seed, "pathrank:pairs");
        popts.log = log_stderr;
        auto pairs = make_training_pairs(*data.graph, data.kb, to_string(rc.relation),
                                         data.type_universe, popts);
        ForestTrainOptions fopts;
        fopts.n_trees = rc.n_trees;
        fopts.max_path_len = rc.max_path_len;
        fopts.seed = derive_seed(rc.seed, "pathrank:forest");
        models.forest = train_forest(pairs, *data.graph, fopts);
    }
    return models;
}

namespace {

// candidate types per person, in (person, type) order
std::map<PersonId, std::vector<TypeId>> group_by_person(const std::vector<KbAssertion>& triples) {
    std::map<PersonId, std::vector<TypeId>> out;
    for (const auto& t : triples) out[t.person].push_back(t.type);
    for (auto& [p, types] : out) {
        std::sort(types.begin(), types.end());
        types.erase(std::unique(types.begin(), types.end()), types.end());
    }
    return out;
}

std::vector<MaybeRawScore> raw_scores_for_person(const RunConfig& rc, const LoadedData& data,
                                                 const TrainedModels& models, ScorerKind scorer,
                                                 const PersonId& person,
                                                 const std::vector<TypeId>& types) {
    std::vector<MaybeRawScore> out(types.size());
    const TokenCounts& text = text_of(data.texts, person);
    switch (scorer) {
        case ScorerKind::word_classification:
            for (std::size_t i = 0; i < types.size(); ++i)
                out[i] = score_word_classification(*models.logistic, types[i], text);
            break;
        case ScorerKind::word_counting:
            for (std::size_t i = 0; i < types.size(); ++i)
                out[i] = score_word_counting(*models.counting, types[i], text);
            break;
        case ScorerKind::word_mle: {
            // one EM run per person over the candidate types known to the model
            std::vector<TypeId> known;
            std::vector<std::size_t> slot;
            for (std::size_t i = 0; i < types.size(); ++i)
                if (models.mle->cond.count(types[i])) {
                    known.push_back(types[i]);
                    slot.push_back(i);
                }
            if (known.empty()) break;
            auto est = estimate_mle(*models.mle, text, known);
            if (!est) break;
            std::size_t offset = est->has_pseudo ? 1 : 0;
            for (std::size_t j = 0; j < known.size(); ++j)
                out[slot[j]] = RawScore{est->mixture[offset + j], RawKind::probability};
            break;
        }
        case ScorerKind::path_ranking:
            for (std::size_t i = 0; i < types.size(); ++i)
                out[i] = score_path_ranking(*models.forest, *data.graph, person, types[i],
                                            rc.relation, data.kb_type_counts,
                                            rc.min_professions);
            break;
    }
    return out;
}

}  // namespace

std::vector<ScoreEntry> score_triples(const RunConfig& rc, const LoadedData& data,
                                      const TrainedModels& models, ScorerKind scorer,
                                      const std::vector<KbAssertion>& triples) {
    auto grouped = group_by_person(triples);
    std::vector<std::pair<const PersonId*, const std::vector<TypeId>*>> persons;
    persons.reserve(grouped.size());
    for (const auto& [p, types] : grouped) persons.emplace_back(&p, &types);

    MappingStrategy strategy = rc.mapping.get(scorer, rc.relation);
    std::vector<std::vector<ScoreEntry>> per_person(persons.size());
    parallel_for(persons.size(), rc.jobs, [&](std::size_t pi) {
        const PersonId& person = *persons[pi].first;
        const std::vector<TypeId>& types = *persons[pi].second;
        auto raws = raw_scores_for_person(rc, data, models, scorer, person, types);
        // s_max per person over the same scorer's non-abstained candidates
        double s_max = 0.0;
        for (const auto& r : raws)
            if (r) s_max = std::max(s_max, r->value);
        auto& entries = per_person[pi];
        entries.reserve(types.size());
        for (std::size_t i = 0; i < types.size(); ++i) {
            ScoreEntry e;
            e.person = person;
            e.type = types[i];
            e.raw = raws[i];
            if (raws[i])
                e.mapped = strategy == MappingStrategy::mapscale
                               ? apply_mapping(strategy, *raws[i], 0.0)
                               : apply_mapping(strategy, *raws[i], s_max);
            entries.push_back(std::move(e));
        }
    });

    std::vector<ScoreEntry> out;
    out.reserve(triples.size());
    for (auto& entries : per_person)
        for (auto& e : entries) out.push_back(std::move(e));
    return out;
}

void write_score_file(const std::string& path, const std::vector<ScoreEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    for (const auto& e : entries) {
        out << e.person << '\t' << e.type << '\t';
        if (e.mapped)
            out << *e.mapped;
        else
            out << "ABSTAIN";
        out << '\t';
        if (e.raw)
            out << e.raw->value;
        else
            out << "ABSTAIN";
        out << '\n';
    }
}

MappedScores load_score_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    MappedScores out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string person, type, mapped;
        if (!std::getline(ss, person, '\t') || !std::getline(ss, type, '\t') ||
            !std::getline(ss, mapped, '\t'))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad score line");
        if (mapped == "ABSTAIN") continue;
        int v = std::stoi(mapped);
        if (v < kMinScore || v > kMaxScore)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": mapped score out of range");
        out[{person, type}] = v;
    }
    return out;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

namespace {

struct TriggerFlags {
    bool in_first = false;
    bool in_description = false;
    bool has_description = false;
};

TriggerFlags trigger_flags(const LoadedData& data, const PersonId& person, const TypeId& type) {
    TriggerFlags f;
    if (!data.lexicon || !data.lexicon->has_type(type)) return f;
    auto it = data.descriptions.find(person);
    if (it == data.descriptions.end()) return f;
    f.has_description = true;
    auto [first, rest] = split_first_sentence(it->second, data.abbreviations);
    f.in_first = detect(*data.lexicon, type, first);
    f.in_description = f.in_first || detect(*data.lexicon, type, it->second);
    return f;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& rc) {
    std::string stage = "ingest";
    std::vector<std::string> created;
    try {
        std::filesystem::create_directories(rc.out_dir);
        LoadedData data = load_inputs(rc);

        stage = "train";
        TrainedModels models = train_models(rc, data);

        // persist models; their hashes go into the manifest
        std::map<ScorerKind, std::string> model_paths;
        for (ScorerKind sk : rc.scorers) {
            std::string path = rc.out_dir + "/model_" + to_string(sk) + ".txt";
            switch (sk) {
                case ScorerKind::word_classification:
                    save_logistic_model(path, *models.logistic);
                    break;
                case ScorerKind::word_counting: save_counting_model(path, *models.counting); break;
                case ScorerKind::word_mle: save_mle_model(path, *models.mle); break;
                case ScorerKind::path_ranking: save_forest_model(path, *models.forest); break;
            }
            model_paths[sk] = path;
            created.push_back(path);
        }

        stage = "score";
        std::vector<KbAssertion> triples;
        if (!data.gold.empty())
            for (const auto& g : data.gold) triples.push_back(g.assertion);
        else
            triples = data.kb;
        if (triples.empty()) throw std::runtime_error("no triples to score");

        std::map<ScorerKind, std::vector<ScoreEntry>> scored;
        for (ScorerKind sk : rc.scorers) {
            scored[sk] = score_triples(rc, data, models, sk, triples);
            std::string path = rc.out_dir + "/scores_" + to_string(sk) + ".tsv";
            write_score_file(path, scored[sk]);
            created.push_back(path);
        }

        stage = "ensemble";
        EnsembleWeights weights;
        if (!rc.explicit_weights.empty()) {
            for (ScorerKind sk : rc.scorers) {
                auto it = rc.explicit_weights.find(sk);
                if (it == rc.explicit_weights.end())
                    throw std::runtime_error(std::string("no explicit weight for scorer ") +
                                             to_string(sk));
                weights.acc[sk] = it->second;
            }
        } else {
            if (data.dev_gold.empty())
                throw std::runtime_error("no dev gold file and no explicit ensemble weights");
            std::vector<KbAssertion> dev_triples;
            for (const auto& g : data.dev_gold) dev_triples.push_back(g.assertion);
            DevScores dev;
            for (ScorerKind sk : rc.scorers) {
                std::vector<ScoreEntry> entries =
                    rc.dev_gold_path == rc.gold_path && !scored[sk].empty()
                        ? scored[sk]
                        : score_triples(rc, data, models, sk, dev_triples);
                MappedScores mapped;
                for (const auto& e : entries)
                    if (e.mapped) mapped[{e.person, e.type}] = *e.mapped;
                auto& pairs = dev[sk];
                for (const auto& g : data.dev_gold) {
                    auto it = mapped.find({g.assertion.person, g.assertion.type});
                    if (it != mapped.end()) pairs.emplace_back(it->second, g.score);
                }
                if (pairs.empty()) {
                    log_stderr(std::string("scorer ") + to_string(sk) +
                               " abstained on the whole dev set; dropped from the ensemble");
                    dev.erase(sk);
                }
            }
            if (dev.empty()) throw std::runtime_error("no scorer covered the dev set");
            weights = derive_weights(dev, rc.acc_threshold);
        }

        std::vector<ScoredTriple> predictions;
        predictions.reserve(triples.size());
        // triples in canonical (person, type) order via the scored entries
        const std::vector<ScoreEntry>& canon = scored.begin()->second;
        for (std::size_t i = 0; i < canon.size(); ++i) {
            TripleScoreVector vec;
            vec.person = canon[i].person;
            vec.type = canon[i].type;
            for (ScorerKind sk : rc.scorers) {
                if (!weights.acc.count(sk)) continue;  // dropped scorer
                vec.scores[sk] = scored[sk][i].mapped;
            }
            predictions.push_back({vec.person, vec.type, combine(vec, weights)});
        }

        if (rc.refine_enabled && data.lexicon) {
            stage = "refine";
            for (auto& p : predictions) {
                TriggerFlags f = trigger_flags(data, p.person, p.type);
                if (!f.has_description) continue;  // nothing to detect against
                p.score = refine(p.score, rc.relation, f.in_first, f.in_description);
            }
        }

        stage = "write";
        PipelineResult res;
        res.weights = weights;
        res.predictions = predictions;
        res.predictions_path = rc.out_dir + "/predictions.tsv";
        write_predictions(res.predictions_path, predictions);
        created.push_back(res.predictions_path);

        res.manifest_path = rc.out_dir + "/manifest.txt";
        {
            std::ofstream out(res.manifest_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write manifest");
            out.precision(17);
            out << "triplescore manifest 1\n";
            out << "tool.version = 0.1.0\n";
            const KeyValueConfig snapshot = rc.to_config();
            for (const auto& [k, v] : snapshot.values()) {
                // out_dir and jobs never influence the result; keeping them out
                // makes manifests comparable across reruns
                if (k == "run.out_dir" || k == "run.jobs") continue;
                out << k << " = " << v << '\n';
            }
            for (const auto& [sk, acc] : weights.acc)
                out << "weights." << to_string(sk) << " = " << acc << '\n';
            for (const auto& [sk, path] : model_paths)
                out << "model." << to_string(sk) << ".hash = " << hex64(fnv1a_file(path)) << '\n';
            out << "predictions.hash = " << hex64(fnv1a_file(res.predictions_path)) << '\n';
            out << "predictions.count = " << predictions.size() << '\n';
        }
        created.push_back(res.manifest_path);

        if (!data.gold.empty()) {
            stage = "evaluate";
            EvaluateOptions eopts;
            eopts.acc_threshold = rc.acc_threshold;
            res.metrics = evaluate_pairs(predictions, data.gold, eopts);
        }
        return res;
    } catch (const std::exception& e) {
        for (const auto& path : created) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        throw std::runtime_error("stage " + stage + ": " + e.what());
    }
}

}  // namespace triplescore
