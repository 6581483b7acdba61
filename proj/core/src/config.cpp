#include "triplescore/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace triplescore {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

std::string KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("missing config key: " + key);
    return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size())
        throw std::runtime_error("config key " + key + ": not an integer: " + it->second);
    return v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": not a number: " + it->second);
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key " + key + ": not a boolean: " + v);
}

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
    RunConfig rc;
    rc.sentences_path = kv.get_or("corpus.sentences", "");
    rc.kb_path = kv.get_or("corpus.kb", "");
    rc.kg_path = kv.get_or("corpus.kg", "");
    rc.descriptions_path = kv.get_or("corpus.descriptions", "");
    rc.gold_path = kv.get_or("corpus.gold", "");
    rc.dev_gold_path = kv.get_or("corpus.dev_gold", rc.gold_path);
    rc.stoplist_path = kv.get_or("corpus.stoplist", "");
    rc.abbreviations_path = kv.get_or("trigger.abbreviations", "");
    rc.lexicon_path = kv.get_or("trigger.lexicon", "");

    rc.relation = parse_relation(kv.get_or("run.relation", "profession"));
    if (kv.has("run.scorers")) {
        rc.scorers.clear();
        for (const auto& s : split(kv.get("run.scorers"), ','))
            rc.scorers.push_back(parse_scorer(s));
        if (rc.scorers.empty()) throw std::runtime_error("run.scorers: no scorer enabled");
    }

    // mapping overrides: mapping.<scorer>.<relation> = strategy
    for (ScorerKind sk : {ScorerKind::word_classification, ScorerKind::word_counting,
                          ScorerKind::word_mle, ScorerKind::path_ranking})
        for (TargetRelation rel : {TargetRelation::profession, TargetRelation::nationality}) {
            std::string key = std::string("mapping.") + to_string(sk) + "." + to_string(rel);
            if (kv.has(key)) rc.mapping.set(sk, rel, parse_mapping(kv.get(key)));
        }

    if (kv.has("ensemble.weights")) {
        for (const auto& item : split(kv.get("ensemble.weights"), ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("ensemble.weights: expected scorer=value items");
            rc.explicit_weights[parse_scorer(trim(item.substr(0, eq)))] =
                std::stod(item.substr(eq + 1));
        }
    }

    rc.refine_enabled = kv.get_bool("trigger.refine", true);
    rc.seed = static_cast<std::uint64_t>(kv.get_int("run.seed", 1));
    rc.jobs = static_cast<int>(kv.get_int("run.jobs", 1));
    if (rc.jobs < 1) throw std::runtime_error("run.jobs must be >= 1");

    rc.vocab_cap_class = static_cast<std::size_t>(kv.get_int("features.vocab_cap_class", 20000));
    rc.vocab_cap_count = static_cast<std::size_t>(kv.get_int("features.vocab_cap_count", 100000));
    rc.vocab_cap_mle = static_cast<std::size_t>(kv.get_int("features.vocab_cap_mle", 20000));
    rc.bucket_cap = static_cast<std::size_t>(kv.get_int("features.bucket_cap", 100));
    rc.pseudo_sample_size = static_cast<std::size_t>(kv.get_int("mle.pseudo_sample", 10000));
    rc.top_n = static_cast<std::size_t>(kv.get_int("pathrank.top_n", 10000));
    rc.n_trees = static_cast<int>(kv.get_int("pathrank.trees", 300));
    rc.max_path_len = static_cast<int>(kv.get_int("pathrank.max_path_len", 3));
    rc.min_professions = static_cast<int>(kv.get_int("pathrank.min_professions", 4));
    rc.acc_threshold = static_cast<int>(kv.get_int("eval.acc_threshold", 2));
    rc.out_dir = kv.get_or("run.out_dir", "out");
    return rc;
}

KeyValueConfig RunConfig::to_config() const {
    KeyValueConfig kv;
    kv.set("corpus.sentences", sentences_path);
    kv.set("corpus.kb", kb_path);
    kv.set("corpus.kg", kg_path);
    kv.set("corpus.descriptions", descriptions_path);
    kv.set("corpus.gold", gold_path);
    kv.set("corpus.dev_gold", dev_gold_path);
    kv.set("corpus.stoplist", stoplist_path);
    kv.set("trigger.abbreviations", abbreviations_path);
    kv.set("trigger.lexicon", lexicon_path);
    kv.set("run.relation", to_string(relation));
    std::string names;
    for (auto s : scorers) {
        if (!names.empty()) names += ',';
        names += to_string(s);
    }
    kv.set("run.scorers", names);
    for (ScorerKind sk : scorers)
        for (TargetRelation rel : {TargetRelation::profession, TargetRelation::nationality})
            kv.set(std::string("mapping.") + to_string(sk) + "." + to_string(rel),
                   to_string(mapping.get(sk, rel)));
    if (!explicit_weights.empty()) {
        std::string w;
        for (const auto& [sk, v] : explicit_weights) {
            if (!w.empty()) w += ',';
            w += std::string(to_string(sk)) + "=" + std::to_string(v);
        }
        kv.set("ensemble.weights", w);
    }
    kv.set("trigger.refine", refine_enabled ? "true" : "false");
    kv.set("run.seed", std::to_string(seed));
    kv.set("run.jobs", std::to_string(jobs));
    kv.set("features.vocab_cap_class", std::to_string(vocab_cap_class));
    kv.set("features.vocab_cap_count", std::to_string(vocab_cap_count));
    kv.set("features.vocab_cap_mle", std::to_string(vocab_cap_mle));
    kv.set("features.bucket_cap", std::to_string(bucket_cap));
    kv.set("mle.pseudo_sample", std::to_string(pseudo_sample_size));
    kv.set("pathrank.top_n", std::to_string(top_n));
    kv.set("pathrank.trees", std::to_string(n_trees));
    kv.set("pathrank.max_path_len", std::to_string(max_path_len));
    kv.set("pathrank.min_professions", std::to_string(min_professions));
    kv.set("eval.acc_threshold", std::to_string(acc_threshold));
    kv.set("run.out_dir", out_dir);
    return kv;
}

}  // namespace triplescore
