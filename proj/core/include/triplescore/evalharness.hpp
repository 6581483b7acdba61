#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "triplescore/types.hpp"

namespace triplescore {

struct MetricsReport {
    double acc = 0.0;
    double asd = 0.0;
    double tau = 0.0;
    std::size_t n_triples = 0;
    std::size_t n_rank_groups = 0;
};

using PredGoldPair = std::pair<int, int>;  // (pred, gold)

// Fraction of pairs with |pred - gold| <= threshold.
double metric_acc(const std::vector<PredGoldPair>& pairs, int threshold = 2);

// Mean absolute score difference.
double metric_asd(const std::vector<PredGoldPair>& pairs);

// Mean per-group normalized Kendall tau distance; lower is better.
// Per group: (discordant + 0.5 * pred-tied-gold-ordered) / pairs-not-gold-tied.
// Groups below min_group or with all gold ties are skipped.
double metric_tau(const std::vector<std::vector<PredGoldPair>>& groups, std::size_t min_group = 2,
                  std::size_t* n_groups_used = nullptr);

struct EvaluateOptions {
    int acc_threshold = 2;
    std::size_t tau_min_group = 2;
    bool allow_missing = false;  // missing predictions scored as 0
};

// Prediction and gold files: person<TAB>type<TAB>score.
MetricsReport evaluate(const std::string& pred_path, const std::string& gold_path,
                       const EvaluateOptions& opts = {});

MetricsReport evaluate_pairs(const std::vector<ScoredTriple>& preds,
                             const std::vector<GoldTriple>& gold, const EvaluateOptions& opts = {});

struct WorldConfig {
    std::size_t n_persons = 120;
    std::size_t n_types = 6;
    std::size_t max_types_per_person = 3;
    std::size_t sentences_per_person = 20;
    std::size_t words_per_sentence = 8;
    std::size_t type_vocab_size = 12;   // type-specific content words
    std::size_t noise_vocab_size = 20;  // shared filler words
    double mixture_sharpness = 4.0;     // larger -> mass concentrates on the primary type
    double trigger_plant_prob = 1.0;    // first-sentence trigger for the primary type
    double kg_pattern_strength = 1.0;   // probability of the length-2 path pattern per type
    TargetRelation relation = TargetRelation::profession;
    std::uint64_t seed = 1;
};

struct WorldFiles {
    std::string sentences;
    std::string kb;
    std::string kg_triples;
    std::string descriptions;
    std::string gold;
    std::string lexicon;
};

// Deterministic synthetic world for desk-scale end-to-end runs. Writes every
// file under `out_dir` and returns the paths.
WorldFiles generate_world(const WorldConfig& cfg, const std::string& out_dir);

void write_predictions(const std::string& path, const std::vector<ScoredTriple>& preds);
std::vector<ScoredTriple> load_predictions(const std::string& path);

}  // namespace triplescore
