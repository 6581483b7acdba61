// Command-line driver: ingest -> train -> score -> ensemble -> refine ->
// evaluate, as composable subcommands over a flat key/value config file.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "triplescore/pipeline.hpp"

using namespace triplescore;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> relation;
    std::optional<int> jobs;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    cmd->add_option("--seed", args.seed, "override run.seed");
    cmd->add_option("--relation", args.relation, "override run.relation")
        ->check(CLI::IsMember({"profession", "nationality"}));
    cmd->add_option("--jobs", args.jobs, "override run.jobs (worker count)");
    cmd->add_option("--out", args.out, "override run.out_dir");
}

RunConfig resolve_config(const CommonArgs& args, bool require_config = true) {
    std::string path = args.config_path;
    if (path.empty()) {
        const char* env = std::getenv("TRIPLESCORE_CONFIG");
        if (env) path = env;
    }
    KeyValueConfig kv;
    if (!path.empty())
        kv = KeyValueConfig::parse_file(path);
    else if (require_config)
        throw std::runtime_error("no config: pass --config or set TRIPLESCORE_CONFIG");
    if (args.seed) kv.set("run.seed", std::to_string(*args.seed));
    if (args.relation) kv.set("run.relation", *args.relation);
    if (args.jobs) kv.set("run.jobs", std::to_string(*args.jobs));
    if (args.out) kv.set("run.out_dir", *args.out);
    return RunConfig::from_config(kv);
}

void print_metrics(const MetricsReport& m) {
    std::cout << "acc = " << m.acc << "\n"
              << "asd = " << m.asd << "\n"
              << "tau = " << m.tau << "\n"
              << "n_triples = " << m.n_triples << "\n"
              << "n_rank_groups = " << m.n_rank_groups << "\n";
    std::cout << "\n  metric    value\n"
              << "  ACC       " << m.acc << "\n"
              << "  ASD       " << m.asd << "\n"
              << "  TAU       " << m.tau << "  (lower is better)\n";
}

int cmd_ingest(const CommonArgs& args) {
    RunConfig rc = resolve_config(args);
    LoadedData data = load_inputs(rc);
    std::cout << "persons_with_text = " << data.texts.size() << "\n"
              << "kb_assertions = " << data.kb.size() << "\n"
              << "types = " << data.type_universe.size() << "\n"
              << "descriptions = " << data.descriptions.size() << "\n"
              << "gold_triples = " << data.gold.size() << "\n";
    if (data.graph)
        std::cout << "kg_entities = " << data.graph->n_entities() << "\n"
                  << "kg_edges = " << data.graph->n_edges() << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& scorer_name,
              const std::string& model_out) {
    RunConfig rc = resolve_config(args);
    ScorerKind sk = parse_scorer(scorer_name);
    rc.scorers = {sk};
    LoadedData data = load_inputs(rc);
    TrainedModels models = train_models(rc, data);
    std::string path = model_out.empty()
                           ? rc.out_dir + "/model_" + std::string(to_string(sk)) + ".txt"
                           : model_out;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path().empty()
                                            ? "."
                                            : std::filesystem::path(path).parent_path().string());
    switch (sk) {
        case ScorerKind::word_classification: save_logistic_model(path, *models.logistic); break;
        case ScorerKind::word_counting: save_counting_model(path, *models.counting); break;
        case ScorerKind::word_mle: save_mle_model(path, *models.mle); break;
        case ScorerKind::path_ranking: save_forest_model(path, *models.forest); break;
    }
    std::cout << "model = " << path << "\n";
    return 0;
}

int cmd_score(const CommonArgs& args, const std::string& scorer_name,
              const std::string& model_path, const std::string& scores_out) {
    RunConfig rc = resolve_config(args);
    ScorerKind sk = parse_scorer(scorer_name);
    rc.scorers = {sk};
    LoadedData data = load_inputs(rc);

    TrainedModels models;
    std::string mpath = model_path.empty()
                            ? rc.out_dir + "/model_" + std::string(to_string(sk)) + ".txt"
                            : model_path;
    if (std::filesystem::exists(mpath)) {
        switch (sk) {
            case ScorerKind::word_classification:
                models.logistic = load_logistic_model(mpath);
                break;
            case ScorerKind::word_counting: models.counting = load_counting_model(mpath); break;
            case ScorerKind::word_mle: models.mle = load_mle_model(mpath); break;
            case ScorerKind::path_ranking: models.forest = load_forest_model(mpath); break;
        }
    } else {
        models = train_models(rc, data);
    }

    std::vector<KbAssertion> triples;
    if (!data.gold.empty())
        for (const auto& g : data.gold) triples.push_back(g.assertion);
    else
        triples = data.kb;
    if (triples.empty()) throw std::runtime_error("no triples to score");

    auto entries = score_triples(rc, data, models, sk, triples);
    std::string path = scores_out.empty()
                           ? rc.out_dir + "/scores_" + std::string(to_string(sk)) + ".tsv"
                           : scores_out;
    std::filesystem::create_directories(rc.out_dir);
    write_score_file(path, entries);
    std::cout << "scores = " << path << "\n";
    return 0;
}

int cmd_ensemble(const CommonArgs& args, const std::vector<std::string>& score_overrides,
                 const std::string& pred_out) {
    RunConfig rc = resolve_config(args);

    std::map<ScorerKind, std::string> score_paths;
    for (ScorerKind sk : rc.scorers)
        score_paths[sk] = rc.out_dir + "/scores_" + std::string(to_string(sk)) + ".tsv";
    for (const auto& ov : score_overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--scores items must be scorer=path");
        score_paths[parse_scorer(ov.substr(0, eq))] = ov.substr(eq + 1);
    }

    std::map<ScorerKind, MappedScores> mapped;
    std::set<std::pair<PersonId, TypeId>> triples;
    for (const auto& [sk, path] : score_paths) {
        mapped[sk] = load_score_file(path);
        for (const auto& [key, v] : mapped[sk]) triples.insert(key);
    }

    EnsembleWeights weights;
    if (!rc.explicit_weights.empty()) {
        for (const auto& [sk, w] : rc.explicit_weights) weights.acc[sk] = w;
    } else {
        if (rc.dev_gold_path.empty())
            throw std::runtime_error("no dev gold file and no explicit ensemble weights");
        auto dev_gold = load_gold(rc.dev_gold_path);
        DevScores dev;
        for (const auto& [sk, scores] : mapped) {
            auto& pairs = dev[sk];
            for (const auto& g : dev_gold) {
                auto it = scores.find({g.assertion.person, g.assertion.type});
                if (it != scores.end()) pairs.emplace_back(it->second, g.score);
            }
            if (pairs.empty()) dev.erase(sk);
        }
        if (dev.empty()) throw std::runtime_error("no scorer covered the dev set");
        weights = derive_weights(dev, rc.acc_threshold);
    }

    std::vector<ScoredTriple> predictions;
    for (const auto& key : triples) {
        TripleScoreVector vec;
        vec.person = key.first;
        vec.type = key.second;
        for (const auto& [sk, scores] : mapped) {
            if (!weights.acc.count(sk)) continue;
            auto it = scores.find(key);
            vec.scores[sk] = it == scores.end() ? std::optional<int>{} : it->second;
        }
        predictions.push_back({vec.person, vec.type, combine(vec, weights)});
    }
    std::string path = pred_out.empty() ? rc.out_dir + "/predictions.tsv" : pred_out;
    write_predictions(path, predictions);
    std::cout << "predictions = " << path << "\n";
    return 0;
}

int cmd_refine(const CommonArgs& args, const std::string& pred_in, const std::string& pred_out) {
    RunConfig rc = resolve_config(args);
    if (rc.lexicon_path.empty()) throw std::runtime_error("trigger.lexicon not set");
    TriggerLexicon lexicon = load_lexicon(rc.lexicon_path);
    auto descriptions = load_descriptions(rc.descriptions_path);
    std::vector<std::string> abbreviations;
    if (!rc.abbreviations_path.empty())
        abbreviations = load_abbreviations(rc.abbreviations_path);

    auto predictions = load_predictions(pred_in);
    for (auto& p : predictions) {
        if (!lexicon.has_type(p.type)) continue;
        auto it = descriptions.find(p.person);
        if (it == descriptions.end()) continue;
        auto [first, rest] = split_first_sentence(it->second, abbreviations);
        bool in_first = detect(lexicon, p.type, first);
        bool in_desc = in_first || detect(lexicon, p.type, it->second);
        p.score = refine(p.score, rc.relation, in_first, in_desc);
    }
    std::string path = pred_out.empty() ? rc.out_dir + "/predictions_refined.tsv" : pred_out;
    write_predictions(path, predictions);
    std::cout << "predictions = " << path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& pred, const std::string& gold, bool allow_missing,
                 int acc_threshold) {
    EvaluateOptions opts;
    opts.allow_missing = allow_missing;
    opts.acc_threshold = acc_threshold;
    print_metrics(evaluate(pred, gold, opts));
    return 0;
}

int cmd_pipeline(const CommonArgs& args) {
    RunConfig rc = resolve_config(args);
    PipelineResult res = run_pipeline(rc);
    std::cout << "predictions = " << res.predictions_path << "\n"
              << "manifest = " << res.manifest_path << "\n";
    for (const auto& [sk, acc] : res.weights.acc)
        std::cout << "weight." << to_string(sk) << " = " << acc << "\n";
    if (res.metrics) print_metrics(*res.metrics);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triple relevance scoring over text and knowledge-graph evidence"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* ingest = app.add_subcommand("ingest", "validate and index the input files");
    add_common(ingest, args);

    std::string scorer_name, model_path, scores_out, pred_in, pred_out;
    auto* train = app.add_subcommand("train", "train one base scorer and persist its model");
    add_common(train, args);
    train->add_option("scorer", scorer_name, "wordclass|wordcount|wordmle|pathrank")->required();
    train->add_option("--model-out", model_path, "model output path");

    auto* score = app.add_subcommand("score", "raw + mapped scores per triple for one scorer");
    add_common(score, args);
    score->add_option("scorer", scorer_name, "wordclass|wordcount|wordmle|pathrank")->required();
    score->add_option("--model", model_path, "model file (trains in-process when absent)");
    score->add_option("--scores-out", scores_out, "score file output path");

    std::vector<std::string> score_overrides;
    auto* ensemble = app.add_subcommand("ensemble", "combine per-scorer score files");
    add_common(ensemble, args);
    ensemble->add_option("--scores", score_overrides, "scorer=path overrides")->delimiter(',');
    ensemble->add_option("--pred-out", pred_out, "predictions output path");

    auto* refine = app.add_subcommand("refine", "apply trigger-word refinement to predictions");
    add_common(refine, args);
    refine->add_option("--pred", pred_in, "predictions to refine")->required();
    refine->add_option("--pred-out", pred_out, "refined predictions output path");

    std::string eval_pred, eval_gold;
    bool allow_missing = false;
    int acc_threshold = 2;
    auto* evaluate = app.add_subcommand("evaluate", "ACC / ASD / TAU of predictions vs gold");
    evaluate->add_option("--pred", eval_pred, "prediction file")->required();
    evaluate->add_option("--gold", eval_gold, "gold file")->required();
    evaluate->add_flag("--allow-missing", allow_missing, "score missing predictions as 0");
    evaluate->add_option("--acc-threshold", acc_threshold, "|pred-gold| tolerance for ACC");

    auto* pipeline = app.add_subcommand("pipeline", "run the full flow end to end");
    add_common(pipeline, args);

    WorldConfig wcfg;
    std::string world_out = "world";
    std::string world_relation = "profession";
    auto* genworld = app.add_subcommand("genworld", "generate a deterministic synthetic world");
    genworld->add_option("--out", world_out, "output directory");
    genworld->add_option("--seed", wcfg.seed, "world seed");
    genworld->add_option("--persons", wcfg.n_persons, "number of persons");
    genworld->add_option("--types", wcfg.n_types, "number of types");
    genworld->add_option("--sentences", wcfg.sentences_per_person, "mean sentences per person");
    genworld->add_option("--sharpness", wcfg.mixture_sharpness, "mixture sharpness");
    genworld->add_option("--plant-prob", wcfg.trigger_plant_prob, "trigger plant probability");
    genworld->add_option("--kg-strength", wcfg.kg_pattern_strength, "KG pattern probability");
    genworld->add_option("--relation", world_relation, "profession|nationality")
        ->check(CLI::IsMember({"profession", "nationality"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(args);
        if (app.got_subcommand(train)) return cmd_train(args, scorer_name, model_path);
        if (app.got_subcommand(score)) return cmd_score(args, scorer_name, model_path, scores_out);
        if (app.got_subcommand(ensemble)) return cmd_ensemble(args, score_overrides, pred_out);
        if (app.got_subcommand(refine)) return cmd_refine(args, pred_in, pred_out);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(eval_pred, eval_gold, allow_missing, acc_threshold);
        if (app.got_subcommand(pipeline)) return cmd_pipeline(args);
        if (app.got_subcommand(genworld)) {
            wcfg.relation = parse_relation(world_relation);
            WorldFiles files = generate_world(wcfg, world_out);
            std::cout << "sentences = " << files.sentences << "\n"
                      << "kb = " << files.kb << "\n"
                      << "kg = " << files.kg_triples << "\n"
                      << "descriptions = " << files.descriptions << "\n"
                      << "gold = " << files.gold << "\n"
                      << "lexicon = " << files.lexicon << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
