#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triplescore/config.hpp"
#include "triplescore/corpus.hpp"
#include "triplescore/ensemble.hpp"
#include "triplescore/evalharness.hpp"
#include "triplescore/path_ranking.hpp"
#include "triplescore/text_scorers.hpp"
#include "triplescore/trigger.hpp"

namespace triplescore {

// Inputs loaded and indexed once; immutable afterwards.
struct LoadedData {
    TextMap texts;
    std::map<PersonId, std::int64_t> popularity;
    std::vector<KbAssertion> kb;
    std::map<PersonId, int> kb_type_counts;  // distinct types per person
    CandidatePools pools;
    std::set<TypeId> type_universe;
    std::optional<KbGraph> graph;
    std::map<PersonId, std::string> descriptions;
    std::vector<GoldTriple> gold;
    std::vector<GoldTriple> dev_gold;
    std::optional<TriggerLexicon> lexicon;
    std::vector<std::string> abbreviations;
};

LoadedData load_inputs(const RunConfig& rc);

struct TrainedModels {
    std::optional<LogisticModel> logistic;
    std::optional<CountingModel> counting;
    std::optional<MleModel> mle;
    std::optional<ForestModel> forest;
};

TrainedModels train_models(const RunConfig& rc, const LoadedData& data);

// (person, type) -> mapped integer score; abstentions omitted from the map.
using MappedScores = std::map<std::pair<PersonId, TypeId>, int>;
struct ScoreEntry {
    PersonId person;
    TypeId type;
    MaybeRawScore raw;
    std::optional<int> mapped;
};

// Raw + mapped scores for `triples` under one scorer. Canonically ordered by
// (person, type) regardless of the worker count.
std::vector<ScoreEntry> score_triples(const RunConfig& rc, const LoadedData& data,
                                      const TrainedModels& models, ScorerKind scorer,
                                      const std::vector<KbAssertion>& triples);

// Score-file stage format: person<TAB>type<TAB>mapped-or-ABSTAIN<TAB>raw-or-ABSTAIN.
void write_score_file(const std::string& path, const std::vector<ScoreEntry>& entries);
MappedScores load_score_file(const std::string& path);

struct PipelineResult {
    std::string predictions_path;
    std::string manifest_path;
    std::optional<MetricsReport> metrics;
    EnsembleWeights weights;
    std::vector<ScoredTriple> predictions;
};

// ingest -> train -> score -> map -> combine -> refine -> evaluate.
PipelineResult run_pipeline(const RunConfig& rc);

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace triplescore
