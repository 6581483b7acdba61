#include "triplescore/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "triplescore/corpus.hpp"
#include "triplescore/rng.hpp"
#include "triplescore/trigger.hpp"

namespace triplescore {

double metric_acc(const std::vector<PredGoldPair>& pairs, int threshold) {
    if (pairs.empty()) throw std::runtime_error("metric_acc: empty input");
    std::size_t hits = 0;
    for (const auto& [pred, gold] : pairs)
        if (std::abs(pred - gold) <= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double metric_asd(const std::vector<PredGoldPair>& pairs) {
    if (pairs.empty()) throw std::runtime_error("metric_asd: empty input");
    double sum = 0.0;
    for (const auto& [pred, gold] : pairs) sum += std::abs(pred - gold);
    return sum / static_cast<double>(pairs.size());
}

double metric_tau(const std::vector<std::vector<PredGoldPair>>& groups, std::size_t min_group,
                  std::size_t* n_groups_used) {
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& g : groups) {
        if (g.size() < min_group) continue;
        double penalty = 0.0;
        std::size_t denom = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j) {
                int dg = g[i].second - g[j].second;
                if (dg == 0) continue;  // gold-tied pairs carry no ordering
                ++denom;
                int dp = g[i].first - g[j].first;
                if (dp == 0)
                    penalty += 0.5;
                else if ((dg > 0) != (dp > 0))
                    penalty += 1.0;
            }
        if (denom == 0) continue;
        total += penalty / static_cast<double>(denom);
        ++used;
    }
    if (n_groups_used) *n_groups_used = used;
    return used ? total / static_cast<double>(used) : 0.0;
}

MetricsReport evaluate_pairs(const std::vector<ScoredTriple>& preds,
                             const std::vector<GoldTriple>& gold, const EvaluateOptions& opts) {
    std::map<std::pair<PersonId, TypeId>, int> pred_map;
    for (const auto& p : preds) pred_map[{p.person, p.type}] = p.score;

    std::vector<PredGoldPair> pairs;
    std::map<PersonId, std::vector<PredGoldPair>> by_person;
    for (const auto& g : gold) {
        auto it = pred_map.find({g.assertion.person, g.assertion.type});
        int pred;
        if (it != pred_map.end()) {
            pred = it->second;
        } else if (opts.allow_missing) {
            pred = 0;
        } else {
            throw std::runtime_error("evaluate: no prediction for triple " + g.assertion.person +
                                     " / " + g.assertion.type);
        }
        pairs.emplace_back(pred, g.score);
        by_person[g.assertion.person].emplace_back(pred, g.score);
    }

    MetricsReport rep;
    rep.n_triples = pairs.size();
    rep.acc = metric_acc(pairs, opts.acc_threshold);
    rep.asd = metric_asd(pairs);
    std::vector<std::vector<PredGoldPair>> groups;
    groups.reserve(by_person.size());
    for (auto& [person, g] : by_person) groups.push_back(std::move(g));
    std::size_t used = 0;
    rep.tau = metric_tau(groups, opts.tau_min_group, &used);
    rep.n_rank_groups = used;
    return rep;
}

std::vector<ScoredTriple> load_predictions(const std::string& path) {
    std::vector<ScoredTriple> out;
    for (const auto& g : load_gold(path))  // same format and range checks
        out.push_back({g.assertion.person, g.assertion.type, g.score});
    return out;
}

void write_predictions(const std::string& path, const std::vector<ScoredTriple>& preds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& p : preds) out << p.person << '\t' << p.type << '\t' << p.score << '\n';
}

MetricsReport evaluate(const std::string& pred_path, const std::string& gold_path,
                       const EvaluateOptions& opts) {
    return evaluate_pairs(load_predictions(pred_path), load_gold(gold_path), opts);
}

namespace {

std::string type_name(std::size_t i) { return "T" + std::to_string(i); }
std::string person_name(std::size_t i) { return "p" + std::to_string(i); }
std::string trigger_term(std::size_t i) { return "trade" + std::to_string(i); }

}  // namespace

WorldFiles generate_world(const WorldConfig& cfg, const std::string& out_dir) {
    if (cfg.n_persons < 1 || cfg.n_types < 1 || cfg.max_types_per_person < 1 ||
        cfg.sentences_per_person < 1)
        throw std::runtime_error("generate_world: counts must be >= 1");
    std::filesystem::create_directories(out_dir);
    auto rng = make_rng(derive_seed(cfg.seed, "world"));

    // per-type content vocabulary and shared noise words
    std::vector<std::vector<std::string>> type_words(cfg.n_types);
    for (std::size_t t = 0; t < cfg.n_types; ++t)
        for (std::size_t k = 0; k < cfg.type_vocab_size; ++k)
            type_words[t].push_back("w" + std::to_string(t) + "q" + std::to_string(k));
    std::vector<std::string> noise;
    for (std::size_t k = 0; k < cfg.noise_vocab_size; ++k)
        noise.push_back("fill" + std::to_string(k));

    struct PersonWorld {
        std::vector<std::size_t> types;  // primary first
        std::vector<double> mixture;
        std::vector<int> gold;
    };
    std::vector<PersonWorld> persons(cfg.n_persons);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& pw : persons) {
        std::size_t m =
            1 + std::uniform_int_distribution<std::size_t>(0, cfg.max_types_per_person - 1)(rng);
        m = std::min(m, cfg.n_types);
        auto idx = sample_without_replacement(cfg.n_types, m, rng);
        pw.types.assign(idx.begin(), idx.end());
        double z = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            double w = std::pow(std::max(cfg.mixture_sharpness, 1.000001), -static_cast<double>(r));
            pw.mixture.push_back(w);
            z += w;
        }
        for (auto& w : pw.mixture) w /= z;
        for (double w : pw.mixture)
            pw.gold.push_back(static_cast<int>(std::lround(7.0 * w)));
    }

    WorldFiles files;
    files.sentences = out_dir + "/sentences.tsv";
    files.kb = out_dir + "/" + std::string(to_string(cfg.relation)) + ".kb";
    files.kg_triples = out_dir + "/kg.tsv";
    files.descriptions = out_dir + "/descriptions.tsv";
    files.gold = out_dir + "/gold.tsv";
    files.lexicon = out_dir + "/lexicon.tsv";

    // sentences: "<person> tok tok ..." with the mention covering the person id
    {
        std::ofstream out(files.sentences, std::ios::binary);
        std::int64_t sid = 0;
        for (std::size_t i = 0; i < cfg.n_persons; ++i) {
            const auto& pw = persons[i];
            std::string pid = person_name(i);
            std::size_t n_sent = 1 + std::uniform_int_distribution<std::size_t>(
                                         0, 2 * cfg.sentences_per_person - 1)(rng);
            std::discrete_distribution<std::size_t> pick_type(pw.mixture.begin(),
                                                              pw.mixture.end());
            for (std::size_t s = 0; s < n_sent; ++s) {
                std::size_t t = pw.types[pick_type(rng)];
                std::string text = pid;
                for (std::size_t k = 0; k < cfg.words_per_sentence; ++k) {
                    text += ' ';
                    if (unit(rng) < 0.3)
                        text += noise[std::uniform_int_distribution<std::size_t>(
                            0, noise.size() - 1)(rng)];
                    else
                        text += type_words[t][std::uniform_int_distribution<std::size_t>(
                            0, type_words[t].size() - 1)(rng)];
                }
                out << sid++ << '\t' << text << '\t' << pid << ":0:" << pid.size() << '\n';
            }
        }
    }

    // kb + gold
    {
        std::ofstream kb(files.kb, std::ios::binary);
        std::ofstream gold(files.gold, std::ios::binary);
        for (std::size_t i = 0; i < cfg.n_persons; ++i) {
            const auto& pw = persons[i];
            for (std::size_t r = 0; r < pw.types.size(); ++r) {
                kb << person_name(i) << '\t' << type_name(pw.types[r]) << '\n';
                gold << person_name(i) << '\t' << type_name(pw.types[r]) << '\t' << pw.gold[r]
                     << '\n';
            }
        }
    }

    // descriptions: first sentence plants the primary trigger; later sentences
    // mention secondary types that still deserve a mid score
    {
        std::ofstream out(files.descriptions, std::ios::binary);
        for (std::size_t i = 0; i < cfg.n_persons; ++i) {
            const auto& pw = persons[i];
            std::string d = "Person " + person_name(i);
            if (unit(rng) < cfg.trigger_plant_prob)
                d += " is a " + trigger_term(pw.types[0]) + ".";
            else
                d += " is a public figure.";
            for (std::size_t r = 1; r < pw.types.size(); ++r)
                if (pw.gold[r] >= 3) d += " Also known as a " + trigger_term(pw.types[r]) + ".";
            out << person_name(i) << '\t' << d << '\n';
        }
    }

    // lexicon from the base trigger terms (plurals included)
    {
        TermMap base;
        for (std::size_t t = 0; t < cfg.n_types; ++t)
            base[type_name(t)].push_back(trigger_term(t));
        write_lexicon(files.lexicon, build_lexicon(base, {}, {}, {}));
    }

    // KG: target-relation edges for observed types, a length-2 pattern
    // (person -> guild -> type) for the primary type, plus social noise
    {
        std::ofstream out(files.kg_triples, std::ios::binary);
        std::string rel = to_string(cfg.relation);
        std::set<std::size_t> guilds_emitted;
        for (std::size_t i = 0; i < cfg.n_persons; ++i) {
            const auto& pw = persons[i];
            for (std::size_t t : pw.types)
                out << person_name(i) << '\t' << rel << '\t' << type_name(t) << '\n';
            std::size_t primary = pw.types[0];
            if (unit(rng) < cfg.kg_pattern_strength) {
                out << person_name(i) << "\tmemberOf\tguild" << primary << '\n';
                if (guilds_emitted.insert(primary).second)
                    out << "guild" << primary << "\tguildOf\t" << type_name(primary) << '\n';
            }
            std::size_t buddy = std::uniform_int_distribution<std::size_t>(
                0, cfg.n_persons - 1)(rng);
            if (buddy != i)
                out << person_name(i) << "\tknows\t" << person_name(buddy) << '\n';
        }
    }

    return files;
}

}  // namespace triplescore
