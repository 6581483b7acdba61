#include "triplescore/text_scorers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "triplescore/rng.hpp"

namespace triplescore {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sparse_dot(const std::vector<double>& w, const SparseVector& x) {
    double s = 0.0;
    for (const auto& [i, v] : x.entries) s += w[i] * v;
    return s;
}

// log(1 + exp(-m)) without overflow
double log1pexp_neg(double m) {
    if (m > 0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

const TokenCounts& text_of(const TextMap& texts, const PersonId& p) {
    static const TokenCounts empty;
    auto it = texts.find(p);
    return it == texts.end() ? empty : it->second;
}

}  // namespace

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 9.0));
    return grid;
}

std::pair<std::vector<double>, double> fit_logistic(const std::vector<SparseVector>& xs,
                                                    const std::vector<int>& labels,
                                                    std::size_t dim, double lambda,
                                                    double grad_tol, int max_iter,
                                                    std::vector<double>* loss_trace) {
    const std::size_t n = xs.size();
    std::vector<double> w(dim, 0.0);
    double b = 0.0;

    auto objective = [&](const std::vector<double>& wv, double bv) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            loss += log1pexp_neg(labels[i] * (sparse_dot(wv, xs[i]) + bv));
        double reg = 0.0;
        for (double v : wv) reg += v * v;
        return loss + 0.5 * lambda * reg;
    };

    std::vector<double> grad(dim), trial(dim);
    double cur = objective(w, b);
    if (loss_trace) loss_trace->push_back(cur);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = labels[i] * (sparse_dot(w, xs[i]) + b);
            double coef = -labels[i] * sigmoid(-m);
            for (const auto& [j, v] : xs[i].entries) grad[j] += coef * v;
            grad_b += coef;
        }
        for (std::size_t j = 0; j < dim; ++j) grad[j] += lambda * w[j];

        double gnorm = std::abs(grad_b);
        double gsq = grad_b * grad_b;
        for (double g : grad) {
            gnorm = std::max(gnorm, std::abs(g));
            gsq += g * g;
        }
        if (gnorm < grad_tol) break;

        // backtracking line search (Armijo)
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = w[j] - step * grad[j];
            double trial_b = b - step * grad_b;
            double val = objective(trial, trial_b);
            if (val <= cur - 1e-4 * step * gsq) {
                w.swap(trial);
                b = trial_b;
                cur = val;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (loss_trace) loss_trace->push_back(cur);
    }
    return {std::move(w), b};
}

namespace {

double fold_accuracy(const std::vector<SparseVector>& xs, const std::vector<int>& labels,
                     std::size_t dim, double lambda, const std::vector<std::size_t>& order,
                     int folds, double grad_tol, int max_iter) {
    double acc_sum = 0.0;
    int folds_used = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<SparseVector> train_x;
        std::vector<int> train_y;
        std::vector<std::size_t> test_idx;
        for (std::size_t r = 0; r < order.size(); ++r) {
            if (static_cast<int>(r % folds) == f)
                test_idx.push_back(order[r]);
            else {
                train_x.push_back(xs[order[r]]);
                train_y.push_back(labels[order[r]]);
            }
        }
        if (test_idx.empty() || train_x.empty()) continue;
        auto [w, b] = fit_logistic(train_x, train_y, dim, lambda, grad_tol, max_iter);
        std::size_t hits = 0;
        for (auto i : test_idx) {
            int pred = sparse_dot(w, xs[i]) + b >= 0.0 ? 1 : -1;
            if (pred == labels[i]) ++hits;
        }
        acc_sum += static_cast<double>(hits) / static_cast<double>(test_idx.size());
        ++folds_used;
    }
    return folds_used == 0 ? 0.0 : acc_sum / folds_used;
}

}  // namespace

LogisticModel train_word_classification(const SampledExamples& examples, const TextMap& texts,
                                        const LogisticTrainOptions& opts) {
    LogisticModel model;
    for (const auto& [type, people] : examples) {
        std::size_t n_pos = 0, n_neg = 0;
        for (const auto& e : people) (e.positive ? n_pos : n_neg) += 1;
        if (n_pos < 2 || n_neg < 2) {
            model.untrainable.insert(type);
            if (opts.log) opts.log("type " + type + ": too few examples per label, skipping");
            continue;
        }

        TextMap example_texts;
        for (const auto& e : people) example_texts[e.person] = text_of(texts, e.person);
        Vocabulary vocab = build_vocabulary(example_texts, opts.vocab_cap);

        std::vector<SparseVector> xs;
        std::vector<int> labels;
        xs.reserve(people.size());
        for (const auto& e : people) {
            xs.push_back(tfidf_vector(text_of(texts, e.person), vocab));
            labels.push_back(e.positive ? 1 : -1);
        }

        std::vector<std::size_t> order(xs.size());
        std::iota(order.begin(), order.end(), 0);
        auto rng = make_rng(derive_seed(opts.seed, "cv:" + type));
        std::shuffle(order.begin(), order.end(), rng);

        double best_acc = -1.0;
        double best_lambda = opts.lambda_grid.front();
        for (double lambda : opts.lambda_grid) {  // grid ascending: ties keep the larger lambda
            double acc = fold_accuracy(xs, labels, vocab.size(), lambda, order, opts.cv_folds,
                                       opts.grad_tol, opts.max_iter);
            if (acc >= best_acc) {
                best_acc = acc;
                best_lambda = lambda;
            }
        }

        TypeLogistic tl;
        tl.vocab = std::move(vocab);
        tl.lambda = best_lambda;
        auto [w, b] =
            fit_logistic(xs, labels, tl.vocab.size(), best_lambda, opts.grad_tol, opts.max_iter);
        tl.weights = std::move(w);
        tl.bias = b;
        model.per_type.emplace(type, std::move(tl));
    }
    return model;
}

MaybeRawScore score_word_classification(const LogisticModel& model, const TypeId& type,
                                        const TokenCounts& person_text) {
    if (model.untrainable.count(type)) return std::nullopt;
    auto it = model.per_type.find(type);
    if (it == model.per_type.end()) return std::nullopt;
    if (person_text.empty()) return std::nullopt;
    const TypeLogistic& tl = it->second;
    SparseVector x = tfidf_vector(person_text, tl.vocab);
    return RawScore{sigmoid(sparse_dot(tl.weights, x) + tl.bias), RawKind::probability};
}

CountingModel build_counting_model(const CandidatePools& pools, const TextMap& texts,
                                   std::size_t vocab_cap) {
    CountingModel model;
    for (const auto& [type, positives] : pools.positives) {
        TextMap corpus;
        for (const auto& p : positives) {
            auto it = texts.find(p);
            if (it != texts.end() && !it->second.empty()) corpus[p] = it->second;
        }
        Vocabulary vocab = build_vocabulary(corpus, vocab_cap);
        model.per_type.emplace(type, corpus_weights(corpus, vocab));
    }
    return model;
}

MaybeRawScore score_word_counting(const CountingModel& model, const TypeId& type,
                                  const TokenCounts& person_text) {
    auto it = model.per_type.find(type);
    if (it == model.per_type.end()) return std::nullopt;
    if (person_text.empty()) return std::nullopt;
    double s = 0.0;
    for (const auto& [tok, c] : person_text) {
        auto w = it->second.find(tok);
        if (w != it->second.end()) s += static_cast<double>(c) * w->second;
    }
    return RawScore{s, RawKind::weighted_sum};
}

namespace {

// normalized, smoothed P(w|component) from a set of person documents
std::optional<std::vector<double>> component_distribution(const std::vector<PersonId>& people,
                                                          const TextMap& texts,
                                                          const Vocabulary& vocab,
                                                          double smoothing) {
    std::vector<double> mass(vocab.size(), 0.0);
    double total = 0.0;
    for (const auto& p : people) {
        auto it = texts.find(p);
        if (it == texts.end()) continue;
        for (const auto& [tok, c] : it->second) {
            auto vi = vocab.index.find(tok);
            if (vi == vocab.index.end()) continue;
            double v = static_cast<double>(c) * vocab.idf(vi->second);
            mass[vi->second] += v;
            total += v;
        }
    }
    if (total <= 0.0 || vocab.size() == 0) return std::nullopt;
    double z = 0.0;
    for (auto& m : mass) {
        m = m / total + smoothing;
        z += m;
    }
    for (auto& m : mass) m /= z;
    return mass;
}

}  // namespace

MleModel build_mle_model(const CandidatePools& pools, const TextMap& texts,
                         const Vocabulary& vocab, const MleBuildOptions& opts) {
    MleModel model;
    model.vocab = vocab;
    for (const auto& [type, positives] : pools.positives) {
        auto dist = component_distribution(positives, texts, vocab, opts.smoothing);
        if (!dist) {
            if (opts.log) opts.log("type " + type + ": no usable positive text, dropped");
            continue;
        }
        model.cond.emplace(type, std::move(*dist));
    }
    if (opts.include_pseudo) {
        std::vector<PersonId> everyone;
        everyone.reserve(texts.size());
        for (const auto& [p, t] : texts) everyone.push_back(p);
        auto rng = make_rng(derive_seed(opts.seed, "mle:pseudo"));
        std::vector<PersonId> sampled;
        for (auto i : sample_without_replacement(
                 everyone.size(), std::min(opts.pseudo_sample_size, everyone.size()), rng))
            sampled.push_back(everyone[i]);
        auto dist = component_distribution(sampled, texts, vocab, opts.smoothing);
        if (dist) model.pseudo = std::move(*dist);
    }
    return model;
}

std::optional<MleEstimate> estimate_mle(const MleModel& model, const TokenCounts& person_text,
                                        const std::vector<TypeId>& person_types, int max_iter,
                                        double tol, std::vector<double>* ll_trace) {
    if (person_types.empty()) throw std::runtime_error("estimate_mle: no types given");

    // word weights: local count x global idf, in-vocab only
    std::vector<std::size_t> word_idx;
    std::vector<double> tf;
    for (const auto& [tok, c] : person_text) {
        auto it = model.vocab.index.find(tok);
        if (it == model.vocab.index.end()) continue;
        word_idx.push_back(it->second);
        tf.push_back(static_cast<double>(c) * model.vocab.idf(it->second));
    }
    if (word_idx.empty()) return std::nullopt;

    std::vector<const std::vector<double>*> comps;
    MleEstimate est;
    if (model.pseudo) {
        comps.push_back(&*model.pseudo);
        est.has_pseudo = true;
    }
    for (const auto& t : person_types) {
        auto it = model.cond.find(t);
        if (it == model.cond.end())
            throw std::runtime_error("estimate_mle: type " + t + " not in model");
        comps.push_back(&it->second);
    }

    const std::size_t k = comps.size();
    const std::size_t nw = word_idx.size();
    std::vector<double> mix(k, 1.0 / static_cast<double>(k));

    auto log_likelihood = [&](const std::vector<double>& m) {
        double ll = 0.0;
        for (std::size_t j = 0; j < nw; ++j) {
            double p = 0.0;
            for (std::size_t i = 0; i < k; ++i) p += m[i] * (*comps[i])[word_idx[j]];
            ll += tf[j] * std::log(std::max(p, 1e-300));
        }
        return ll;
    };

    double ll = log_likelihood(mix);
    if (ll_trace) ll_trace->push_back(ll);
    double tf_total = std::accumulate(tf.begin(), tf.end(), 0.0);
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::vector<double> next(k, 0.0);
        for (std::size_t j = 0; j < nw; ++j) {
            double denom = 0.0;
            for (std::size_t i = 0; i < k; ++i) denom += mix[i] * (*comps[i])[word_idx[j]];
            if (denom <= 0.0) continue;
            for (std::size_t i = 0; i < k; ++i)
                next[i] += tf[j] * mix[i] * (*comps[i])[word_idx[j]] / denom;
        }
        for (auto& v : next) v /= tf_total;
        mix.swap(next);
        double ll_new = log_likelihood(mix);
        if (ll_trace) ll_trace->push_back(ll_new);
        double delta = std::abs(ll_new - ll);
        ll = ll_new;
        if (delta < tol) {
            ++iter;
            break;
        }
    }
    est.mixture = std::move(mix);
    est.log_likelihood = ll;
    est.iterations = iter;
    return est;
}

// ------------------------------------------------------------------- model io

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    return out;
}

std::ifstream open_in(const std::string& path, const std::string& magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != magic) throw std::runtime_error(path + ": bad model header '" + header + "'");
    return in;
}

void write_vocab(std::ostream& out, const Vocabulary& v) {
    out << "vocab\t" << v.size() << '\t' << v.n_docs << '\n';
    for (std::size_t i = 0; i < v.size(); ++i)
        out << v.tokens[i] << '\t' << v.df[i] << '\n';
}

Vocabulary read_vocab(std::istream& in) {
    std::string tag;
    std::size_t n = 0;
    Vocabulary v;
    in >> tag >> n >> v.n_docs;
    if (tag != "vocab") throw std::runtime_error("model file: expected vocab section");
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        std::int64_t df = 0;
        in >> tok >> df;
        v.index.emplace(tok, v.tokens.size());
        v.tokens.push_back(tok);
        v.df.push_back(df);
    }
    return v;
}

}  // namespace

void save_logistic_model(const std::string& path, const LogisticModel& model) {
    auto out = open_out(path);
    out << "triplescore wordclass 1\n";
    for (const auto& t : model.untrainable) out << "untrainable\t" << t << '\n';
    for (const auto& [type, tl] : model.per_type) {
        out << "type\t" << type << '\t' << tl.lambda << '\t' << tl.bias << '\n';
        write_vocab(out, tl.vocab);
        out << "weights\t" << tl.weights.size() << '\n';
        for (double w : tl.weights) out << w << '\n';
    }
}

LogisticModel load_logistic_model(const std::string& path) {
    auto in = open_in(path, "triplescore wordclass 1");
    LogisticModel model;
    std::string tag;
    while (in >> tag) {
        if (tag == "untrainable") {
            std::string t;
            in >> t;
            model.untrainable.insert(t);
        } else if (tag == "type") {
            TypeLogistic tl;
            std::string type;
            in >> type >> tl.lambda >> tl.bias;
            tl.vocab = read_vocab(in);
            std::string wtag;
            std::size_t n = 0;
            in >> wtag >> n;
            if (wtag != "weights") throw std::runtime_error(path + ": expected weights section");
            tl.weights.resize(n);
            for (auto& w : tl.weights) in >> w;
            model.per_type.emplace(type, std::move(tl));
        } else {
            throw std::runtime_error(path + ": unexpected token '" + tag + "'");
        }
    }
    return model;
}

void save_counting_model(const std::string& path, const CountingModel& model) {
    auto out = open_out(path);
    out << "triplescore wordcount 1\n";
    for (const auto& [type, weights] : model.per_type) {
        // ordered emission for byte-stable files
        std::map<std::string, double> ordered(weights.begin(), weights.end());
        out << "type\t" << type << '\t' << ordered.size() << '\n';
        for (const auto& [tok, w] : ordered) out << tok << '\t' << w << '\n';
    }
}

CountingModel load_counting_model(const std::string& path) {
    auto in = open_in(path, "triplescore wordcount 1");
    CountingModel model;
    std::string tag;
    while (in >> tag) {
        if (tag != "type") throw std::runtime_error(path + ": unexpected token '" + tag + "'");
        std::string type;
        std::size_t n = 0;
        in >> type >> n;
        auto& weights = model.per_type[type];
        for (std::size_t i = 0; i < n; ++i) {
            std::string tok;
            double w = 0.0;
            in >> tok >> w;
            weights.emplace(tok, w);
        }
    }
    return model;
}

void save_mle_model(const std::string& path, const MleModel& model) {
    auto out = open_out(path);
    out << "triplescore wordmle 1\n";
    write_vocab(out, model.vocab);
    if (model.pseudo) {
        out << "pseudo\n";
        for (double p : *model.pseudo) out << p << '\n';
    }
    for (const auto& [type, dist] : model.cond) {
        out << "type\t" << type << '\n';
        for (double p : dist) out << p << '\n';
    }
}

MleModel load_mle_model(const std::string& path) {
    auto in = open_in(path, "triplescore wordmle 1");
    MleModel model;
    model.vocab = read_vocab(in);
    std::string tag;
    while (in >> tag) {
        if (tag == "pseudo") {
            std::vector<double> dist(model.vocab.size());
            for (auto& p : dist) in >> p;
            model.pseudo = std::move(dist);
        } else if (tag == "type") {
            std::string type;
            in >> type;
            std::vector<double> dist(model.vocab.size());
            for (auto& p : dist) in >> p;
            model.cond.emplace(type, std::move(dist));
        } else {
            throw std::runtime_error(path + ": unexpected token '" + tag + "'");
        }
    }
    return model;
}

}  // namespace triplescore
