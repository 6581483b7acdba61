#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "triplescore/corpus.hpp"
#include "triplescore/types.hpp"

namespace triplescore {

class KbGraph {
public:
    explicit KbGraph(const std::vector<KgTriple>& triples);

    struct Edge {
        std::size_t relation;
        std::size_t entity;
        auto operator<=>(const Edge&) const = default;
    };

    bool has_entity(const EntityId& e) const { return entity_index_.count(e) > 0; }
    std::optional<std::size_t> entity(const EntityId& e) const;
    const std::string& entity_name(std::size_t i) const { return entities_[i]; }
    const std::string& relation_name(std::size_t i) const { return relations_[i]; }
    std::size_t n_entities() const { return entities_.size(); }
    std::size_t n_edges() const { return n_edges_; }

    const std::vector<Edge>& forward(std::size_t entity) const { return forward_[entity]; }
    const std::vector<Edge>& inverse(std::size_t entity) const { return inverse_[entity]; }

    bool has_edge(const EntityId& head, const RelationId& rel, const EntityId& tail) const;
    // in-degree + out-degree
    std::size_t degree(const EntityId& e) const;

private:
    std::vector<std::string> entities_;
    std::map<std::string, std::size_t> entity_index_;
    std::vector<std::string> relations_;
    std::map<std::string, std::size_t> relation_index_;
    std::vector<std::vector<Edge>> forward_;
    std::vector<std::vector<Edge>> inverse_;
    std::size_t n_edges_ = 0;
};

struct PathStep {
    RelationId relation;
    bool forward = true;
    auto operator<=>(const PathStep&) const = default;
};

using PathType = std::vector<PathStep>;
using PathFeatureVector = std::map<PathType, int>;

std::string encode_path_type(const PathType& p);  // "+rel|-rel|..."
PathType decode_path_type(const std::string& s);

// Counts every simple ground path (no repeated intermediate; head/tail never
// intermediates) of length <= max_len, over forward and inverse edges.
PathFeatureVector extract_paths(const KbGraph& graph, const EntityId& head, const EntityId& tail,
                                int max_len = 3, bool allow_inverse = true);

struct LabeledPair {
    PersonId head;
    TypeId tail;
    bool positive = false;
};

struct TrainingPairOptions {
    std::size_t top_n = 10000;
    std::uint64_t seed = 0;
    std::function<void(const std::string&)> log;
};

// Positives: (person, type) edges of `relation_name` for the top_n persons by
// KG degree; one negative per positive with a replacement type observed in
// neither the graph nor the KB.
std::vector<LabeledPair> make_training_pairs(const KbGraph& graph,
                                             const std::vector<KbAssertion>& kb,
                                             const RelationId& relation_name,
                                             const std::set<TypeId>& type_universe,
                                             const TrainingPairOptions& opts = {});

enum class MaxFeaturesRule { sqrt_rule, log2_rule };

struct ForestHyperparams {
    int min_samples_split = 2;
    MaxFeaturesRule max_features = MaxFeaturesRule::sqrt_rule;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    double predict(const std::vector<double>& row) const;
};

struct ForestModel {
    std::vector<std::string> feature_names;  // encoded path types
    std::vector<DecisionTree> trees;
    ForestHyperparams hyper;
    double validation_auc = 0.0;
    int max_path_len = 3;
    bool allow_inverse = true;

    std::vector<double> featurize(const PathFeatureVector& paths) const;
    double predict(const PathFeatureVector& paths) const;
};

struct ForestTrainOptions {
    int n_trees = 300;
    std::vector<int> min_samples_split_grid = {2, 5, 10};
    std::vector<MaxFeaturesRule> max_features_grid = {MaxFeaturesRule::sqrt_rule,
                                                      MaxFeaturesRule::log2_rule};
    double train_fraction = 0.7;
    int max_path_len = 3;
    bool allow_inverse = true;
    std::uint64_t seed = 0;
};

// Bootstrap CART forest on path-count features; hyperparameters picked on a
// seeded 70/30 split by validation AUC, then refit on all pairs.
ForestModel train_forest(const std::vector<LabeledPair>& pairs, const KbGraph& graph,
                         const ForestTrainOptions& opts = {});

// Mean leaf positive fraction. For profession, abstains when the person has
// fewer than `min_professions` distinct professions in the task KB.
MaybeRawScore score_path_ranking(const ForestModel& model, const KbGraph& graph,
                                 const PersonId& person, const TypeId& type,
                                 TargetRelation relation,
                                 const std::map<PersonId, int>& kb_type_counts,
                                 int min_professions = 4);

// Mann-Whitney AUC, ties count 1/2. Throws when only one label is present.
double compute_auc(const std::vector<std::pair<double, bool>>& scores);

void save_forest_model(const std::string& path, const ForestModel& model);
ForestModel load_forest_model(const std::string& path);

}  // namespace triplescore
