#include "triplescore/path_ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "triplescore/rng.hpp"

namespace triplescore {

// ------------------------------------------------------------------ KbGraph

KbGraph::KbGraph(const std::vector<KgTriple>& triples) {
    auto intern = [](std::vector<std::string>& names, std::map<std::string, std::size_t>& index,
                     const std::string& name) {
        auto [it, inserted] = index.emplace(name, names.size());
        if (inserted) names.push_back(name);
        return it->second;
    };
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (const auto& t : triples) {
        std::size_t h = intern(entities_, entity_index_, t.head);
        std::size_t r = intern(relations_, relation_index_, t.relation);
        std::size_t x = intern(entities_, entity_index_, t.tail);
        if (!seen.insert({h, r, x}).second) continue;
        forward_.resize(entities_.size());
        inverse_.resize(entities_.size());
        forward_[h].push_back({r, x});
        inverse_[x].push_back({r, h});
        ++n_edges_;
    }
    forward_.resize(entities_.size());
    inverse_.resize(entities_.size());
    for (auto& v : forward_) std::sort(v.begin(), v.end());
    for (auto& v : inverse_) std::sort(v.begin(), v.end());
}

std::optional<std::size_t> KbGraph::entity(const EntityId& e) const {
    auto it = entity_index_.find(e);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

bool KbGraph::has_edge(const EntityId& head, const RelationId& rel, const EntityId& tail) const {
    auto h = entity(head);
    auto t = entity(tail);
    auto r = relation_index_.find(rel);
    if (!h || !t || r == relation_index_.end()) return false;
    Edge e{r->second, *t};
    return std::binary_search(forward_[*h].begin(), forward_[*h].end(), e);
}

std::size_t KbGraph::degree(const EntityId& e) const {
    auto i = entity(e);
    if (!i) return 0;
    return forward_[*i].size() + inverse_[*i].size();
}

// -------------------------------------------------------------- path types

std::string encode_path_type(const PathType& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += '|';
        out += p[i].forward ? '+' : '-';
        out += p[i].relation;
    }
    return out;
}

PathType decode_path_type(const std::string& s) {
    PathType out;
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t end = s.find('|', start);
        if (end == std::string::npos) end = s.size();
        if (end - start < 2 || (s[start] != '+' && s[start] != '-'))
            throw std::runtime_error("bad path type: " + s);
        out.push_back({s.substr(start + 1, end - start - 1), s[start] == '+'});
        start = end + 1;
    }
    return out;
}

namespace {

void dfs_paths(const KbGraph& g, std::size_t node, std::size_t head, std::size_t tail,
               int max_len, bool allow_inverse, PathType& steps, std::vector<char>& visited,
               PathFeatureVector& out) {
    auto try_edge = [&](const KbGraph::Edge& e, bool forward) {
        steps.push_back({g.relation_name(e.relation), forward});
        if (e.entity == tail) out[steps] += 1;
        if (static_cast<int>(steps.size()) < max_len && e.entity != tail && e.entity != head &&
            !visited[e.entity]) {
            visited[e.entity] = 1;
            dfs_paths(g, e.entity, head, tail, max_len, allow_inverse, steps, visited, out);
            visited[e.entity] = 0;
        }
        steps.pop_back();
    };
    for (const auto& e : g.forward(node)) try_edge(e, true);
    if (allow_inverse)
        for (const auto& e : g.inverse(node)) try_edge(e, false);
}

}  // namespace

PathFeatureVector extract_paths(const KbGraph& graph, const EntityId& head, const EntityId& tail,
                                int max_len, bool allow_inverse) {
    PathFeatureVector out;
    auto h = graph.entity(head);
    auto t = graph.entity(tail);
    if (!h || !t) return out;
    PathType steps;
    std::vector<char> visited(graph.n_entities(), 0);
    dfs_paths(graph, *h, *h, *t, max_len, allow_inverse, steps, visited, out);
    return out;
}

// ----------------------------------------------------------- training pairs

std::vector<LabeledPair> make_training_pairs(const KbGraph& graph,
                                             const std::vector<KbAssertion>& kb,
                                             const RelationId& relation_name,
                                             const std::set<TypeId>& type_universe,
                                             const TrainingPairOptions& opts) {
    std::set<std::pair<PersonId, TypeId>> kb_pairs;
    for (const auto& a : kb) kb_pairs.insert({a.person, a.type});

    // persons with the relation observed in the graph, with their types
    std::map<PersonId, std::vector<TypeId>> observed;
    for (std::size_t e = 0; e < graph.n_entities(); ++e)
        for (const auto& edge : graph.forward(e))
            if (graph.relation_name(edge.relation) == relation_name)
                observed[graph.entity_name(e)].push_back(graph.entity_name(edge.entity));

    std::vector<PersonId> ranked;
    ranked.reserve(observed.size());
    for (const auto& [p, types] : observed) ranked.push_back(p);
    std::stable_sort(ranked.begin(), ranked.end(), [&](const PersonId& a, const PersonId& b) {
        std::size_t da = graph.degree(a), db = graph.degree(b);
        if (da != db) return da > db;
        return a < b;  // tie-break by id
    });
    if (ranked.size() > opts.top_n) ranked.resize(opts.top_n);

    std::vector<LabeledPair> pairs;
    for (const auto& person : ranked) {
        auto rng = make_rng(derive_seed(opts.seed, "pairs:" + person));
        for (const auto& type : observed.at(person)) {
            pairs.push_back({person, type, true});
            std::vector<TypeId> alternatives;
            for (const auto& alt : type_universe) {
                if (alt == type) continue;
                if (graph.has_edge(person, relation_name, alt)) continue;
                if (kb_pairs.count({person, alt})) continue;
                alternatives.push_back(alt);
            }
            if (alternatives.empty()) {
                // keep positives and negatives balanced: drop the pair entirely
                pairs.pop_back();
                if (opts.log)
                    opts.log("person " + person + ": every alternative type observed, "
                             "dropping (" + person + ", " + type + ")");
                continue;
            }
            std::uniform_int_distribution<std::size_t> pick(0, alternatives.size() - 1);
            pairs.push_back({person, alternatives[pick(rng)], false});
        }
    }
    return pairs;
}

// -------------------------------------------------------------------- forest

double DecisionTree::predict(const std::vector<double>& row) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        double v = static_cast<std::size_t>(n.feature) < row.size() ? row[n.feature] : 0.0;
        node = v <= n.threshold ? n.left : n.right;
    }
    return nodes[node].positive_fraction;
}

std::vector<double> ForestModel::featurize(const PathFeatureVector& paths) const {
    std::vector<double> row(feature_names.size(), 0.0);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < feature_names.size(); ++i) index.emplace(feature_names[i], i);
    for (const auto& [ptype, count] : paths) {
        auto it = index.find(encode_path_type(ptype));
        if (it != index.end()) row[it->second] = static_cast<double>(count);
    }
    return row;
}

double ForestModel::predict(const PathFeatureVector& paths) const {
    std::vector<double> row = featurize(paths);
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

namespace {

using Matrix = std::vector<std::vector<double>>;

double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
    const Matrix& rows;
    const std::vector<int>& labels;  // 0/1
    int min_samples_split;
    std::size_t max_feat;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& samples) {
        std::size_t pos = 0;
        for (auto i : samples) pos += labels[i];
        int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[id].positive_fraction =
            samples.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(samples.size());
        if (samples.size() < static_cast<std::size_t>(min_samples_split) || pos == 0 ||
            pos == samples.size())
            return id;

        const std::size_t n_feat = rows.empty() ? 0 : rows[0].size();
        if (n_feat == 0) return id;
        auto feats = sample_without_replacement(n_feat, std::min(max_feat, n_feat), rng);

        double best_impurity = gini(pos, samples.size());
        int best_feat = -1;
        double best_thresh = 0.0;
        for (auto f : feats) {
            std::vector<double> values;
            values.reserve(samples.size());
            for (auto i : samples) values.push_back(rows[i][f]);
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t v = 0; v + 1 < values.size(); ++v) {
                double thresh = 0.5 * (values[v] + values[v + 1]);
                std::size_t lp = 0, ln = 0, rp = 0, rn = 0;
                for (auto i : samples) {
                    bool left = rows[i][f] <= thresh;
                    if (left)
                        (labels[i] ? lp : ln) += 1;
                    else
                        (labels[i] ? rp : rn) += 1;
                }
                std::size_t lt = lp + ln, rt = rp + rn;
                double imp = (static_cast<double>(lt) * gini(lp, lt) +
                              static_cast<double>(rt) * gini(rp, rt)) /
                             static_cast<double>(samples.size());
                if (imp + 1e-12 < best_impurity) {
                    best_impurity = imp;
                    best_feat = static_cast<int>(f);
                    best_thresh = thresh;
                }
            }
        }
        if (best_feat < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto i : samples)
            (rows[i][static_cast<std::size_t>(best_feat)] <= best_thresh ? left : right)
                .push_back(i);
        nodes[id].feature = best_feat;
        nodes[id].threshold = best_thresh;
        nodes[id].left = build(left);
        nodes[id].right = build(right);
        return id;
    }
};

std::size_t max_features_count(MaxFeaturesRule rule, std::size_t n_feat) {
    if (n_feat <= 1) return n_feat;
    double v = rule == MaxFeaturesRule::sqrt_rule
                   ? std::sqrt(static_cast<double>(n_feat))
                   : std::log2(static_cast<double>(n_feat));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

std::vector<DecisionTree> grow_forest(const Matrix& rows, const std::vector<int>& labels,
                                      const ForestHyperparams& hyper, int n_trees,
                                      std::uint64_t seed) {
    const std::size_t n = rows.size();
    const std::size_t n_feat = rows.empty() ? 0 : rows[0].size();
    std::size_t max_feat = max_features_count(hyper.max_features, n_feat);
    std::vector<DecisionTree> trees(n_trees);
    for (int t = 0; t < n_trees; ++t) {
        auto rng = make_rng(derive_seed(seed, "tree:" + std::to_string(t)));
        std::vector<std::size_t> boot(n);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& i : boot) i = pick(rng);
        TreeBuilder builder{rows, labels, hyper.min_samples_split, max_feat, rng, {}};
        builder.build(boot);
        trees[t].nodes = std::move(builder.nodes);
    }
    return trees;
}

double forest_probability(const std::vector<DecisionTree>& trees, const std::vector<double>& row) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

}  // namespace

double compute_auc(const std::vector<std::pair<double, bool>>& scores) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& [s, pos] : scores) (pos ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) throw std::runtime_error("compute_auc: single-label input");

    std::vector<std::pair<double, bool>> sorted = scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // average ranks over tie groups (Mann-Whitney)
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (sorted[k].second) rank_sum_pos += avg_rank;
        i = j;
    }
    double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ForestModel train_forest(const std::vector<LabeledPair>& pairs, const KbGraph& graph,
                         const ForestTrainOptions& opts) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& p : pairs) (p.positive ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw std::runtime_error("train_forest: need both labels in the training set");

    // path features per pair; the feature map is the union over training pairs
    std::vector<PathFeatureVector> features;
    features.reserve(pairs.size());
    std::set<std::string> names;
    for (const auto& p : pairs) {
        features.push_back(
            extract_paths(graph, p.head, p.tail, opts.max_path_len, opts.allow_inverse));
        for (const auto& [ptype, c] : features.back()) names.insert(encode_path_type(ptype));
    }

    ForestModel model;
    model.feature_names.assign(names.begin(), names.end());
    model.max_path_len = opts.max_path_len;
    model.allow_inverse = opts.allow_inverse;

    Matrix rows;
    rows.reserve(pairs.size());
    for (const auto& f : features) rows.push_back(model.featurize(f));
    std::vector<int> labels;
    labels.reserve(pairs.size());
    for (const auto& p : pairs) labels.push_back(p.positive ? 1 : 0);

    // fixed seeded 70/30 split
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    auto split_rng = make_rng(derive_seed(opts.seed, "split"));
    std::shuffle(order.begin(), order.end(), split_rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(opts.train_fraction * static_cast<double>(order.size())));
    n_train = std::max<std::size_t>(1, std::min(n_train, order.size() - 1));

    Matrix train_rows;
    std::vector<int> train_labels;
    for (std::size_t r = 0; r < n_train; ++r) {
        train_rows.push_back(rows[order[r]]);
        train_labels.push_back(labels[order[r]]);
    }

    double best_auc = -1.0;
    ForestHyperparams best_hyper;
    for (int mss : opts.min_samples_split_grid) {
        for (auto mf : opts.max_features_grid) {
            ForestHyperparams hyper{mss, mf};
            auto trees = grow_forest(train_rows, train_labels, hyper, opts.n_trees, opts.seed);
            std::vector<std::pair<double, bool>> val;
            for (std::size_t r = n_train; r < order.size(); ++r)
                val.emplace_back(forest_probability(trees, rows[order[r]]),
                                 labels[order[r]] == 1);
            double auc;
            try {
                auc = compute_auc(val);
            } catch (const std::runtime_error&) {
                auc = 0.5;  // single-label validation split
            }
            if (auc > best_auc) {  // strict: ties keep the first grid cell
                best_auc = auc;
                best_hyper = hyper;
            }
        }
    }

    model.hyper = best_hyper;
    model.validation_auc = best_auc;
    model.trees = grow_forest(rows, labels, best_hyper, opts.n_trees, opts.seed);
    return model;
}

MaybeRawScore score_path_ranking(const ForestModel& model, const KbGraph& graph,
                                 const PersonId& person, const TypeId& type,
                                 TargetRelation relation,
                                 const std::map<PersonId, int>& kb_type_counts,
                                 int min_professions) {
    if (relation == TargetRelation::profession) {
        auto it = kb_type_counts.find(person);
        int n = it == kb_type_counts.end() ? 0 : it->second;
        if (n < min_professions) return std::nullopt;
    }
    if (!graph.has_entity(person) || !graph.has_entity(type)) return std::nullopt;
    PathFeatureVector paths =
        extract_paths(graph, person, type, model.max_path_len, model.allow_inverse);
    return RawScore{model.predict(paths), RawKind::probability};
}

// ------------------------------------------------------------------ model io

void save_forest_model(const std::string& path, const ForestModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    out << "triplescore pathrank 1\n";
    out << "config\t" << model.hyper.min_samples_split << '\t'
        << (model.hyper.max_features == MaxFeaturesRule::sqrt_rule ? "sqrt" : "log2") << '\t'
        << model.validation_auc << '\t' << model.max_path_len << '\t'
        << (model.allow_inverse ? 1 : 0) << '\n';
    out << "features\t" << model.feature_names.size() << '\n';
    for (const auto& f : model.feature_names) out << f << '\n';
    out << "trees\t" << model.trees.size() << '\n';
    for (const auto& t : model.trees) {
        out << "tree\t" << t.nodes.size() << '\n';
        for (const auto& n : t.nodes)
            out << n.feature << '\t' << n.threshold << '\t' << n.left << '\t' << n.right << '\t'
                << n.positive_fraction << '\n';
    }
}

ForestModel load_forest_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "triplescore pathrank 1")
        throw std::runtime_error(path + ": bad model header '" + header + "'");
    ForestModel model;
    std::string tag, mf;
    int inverse = 1;
    in >> tag >> model.hyper.min_samples_split >> mf >> model.validation_auc >>
        model.max_path_len >> inverse;
    if (tag != "config") throw std::runtime_error(path + ": expected config section");
    model.hyper.max_features =
        mf == "sqrt" ? MaxFeaturesRule::sqrt_rule : MaxFeaturesRule::log2_rule;
    model.allow_inverse = inverse != 0;
    std::size_t n_feat = 0;
    in >> tag >> n_feat;
    if (tag != "features") throw std::runtime_error(path + ": expected features section");
    model.feature_names.resize(n_feat);
    for (auto& f : model.feature_names) in >> f;
    std::size_t n_trees = 0;
    in >> tag >> n_trees;
    if (tag != "trees") throw std::runtime_error(path + ": expected trees section");
    model.trees.resize(n_trees);
    for (auto& t : model.trees) {
        std::size_t n_nodes = 0;
        in >> tag >> n_nodes;
        if (tag != "tree") throw std::runtime_error(path + ": expected tree section");
        t.nodes.resize(n_nodes);
        for (auto& n : t.nodes)
            in >> n.feature >> n.threshold >> n.left >> n.right >> n.positive_fraction;
    }
    return model;
}

}  // namespace triplescore
