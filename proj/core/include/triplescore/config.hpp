#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triplescore/score_mapping.hpp"
#include "triplescore/types.hpp"

namespace triplescore {

// Flat dotted key/value config, one `key = value` per line, '#' comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct RunConfig {
    // inputs
    std::string sentences_path;
    std::string kb_path;
    std::string kg_path;
    std::string descriptions_path;
    std::string gold_path;      // optional: triples to score + evaluation gold
    std::string dev_gold_path;  // optional: dev set for ensemble weights
    std::string stoplist_path;
    std::string abbreviations_path;
    std::string lexicon_path;

    TargetRelation relation = TargetRelation::profession;
    std::vector<ScorerKind> scorers = {ScorerKind::word_classification,
                                       ScorerKind::word_counting, ScorerKind::word_mle,
                                       ScorerKind::path_ranking};
    MappingTable mapping = MappingTable::defaults();
    std::map<ScorerKind, double> explicit_weights;  // skips dev-derived weights when set

    bool refine_enabled = true;
    std::uint64_t seed = 1;
    int jobs = 1;

    // desk-scale knobs (defaults are the documented full-scale values)
    std::size_t vocab_cap_class = 20000;
    std::size_t vocab_cap_count = 100000;
    std::size_t vocab_cap_mle = 20000;
    std::size_t bucket_cap = 100;
    std::size_t pseudo_sample_size = 10000;
    std::size_t top_n = 10000;
    int n_trees = 300;
    int max_path_len = 3;
    int min_professions = 4;
    int acc_threshold = 2;

    std::string out_dir = "out";

    static RunConfig from_config(const KeyValueConfig& kv);
    KeyValueConfig to_config() const;  // resolved snapshot for the manifest
};

}  // namespace triplescore
