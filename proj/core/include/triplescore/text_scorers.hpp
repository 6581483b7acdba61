#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "triplescore/features.hpp"
#include "triplescore/types.hpp"

namespace triplescore {

// ---------------------------------------------------------------- logistic

struct TypeLogistic {
    Vocabulary vocab;
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
};

struct LogisticModel {
    std::map<TypeId, TypeLogistic> per_type;
    std::set<TypeId> untrainable;
};

std::vector<double> default_lambda_grid();  // 10 log-spaced values in [1e-4, 1e4]

struct LogisticTrainOptions {
    std::size_t vocab_cap = 20000;
    std::vector<double> lambda_grid = default_lambda_grid();
    int cv_folds = 5;
    double grad_tol = 1e-6;
    int max_iter = 1000;
    std::uint64_t seed = 0;
    std::function<void(const std::string&)> log;
};

// Per type: l2-regularized logistic regression on tf-idf vectors, lambda
// picked by mean k-fold CV accuracy (ties -> larger lambda). Types without
// both labels are marked untrainable.
LogisticModel train_word_classification(const SampledExamples& examples, const TextMap& texts,
                                        const LogisticTrainOptions& opts = {});

// sigmoid(w.x + b); abstains on empty text or untrainable type.
MaybeRawScore score_word_classification(const LogisticModel& model, const TypeId& type,
                                        const TokenCounts& person_text);

// Deterministic full-batch minimizer for the regularized logistic loss,
// exposed for testing. Returns (weights, bias).
std::pair<std::vector<double>, double> fit_logistic(const std::vector<SparseVector>& xs,
                                                    const std::vector<int>& labels,  // +1 / -1
                                                    std::size_t dim, double lambda,
                                                    double grad_tol = 1e-6, int max_iter = 1000,
                                                    std::vector<double>* loss_trace = nullptr);

// ---------------------------------------------------------------- counting

struct CountingModel {
    std::map<TypeId, TfIdfWeights> per_type;
};

// Per type: corpus-level tf-idf weights over the positive candidates' text,
// vocabulary capped at `vocab_cap`.
CountingModel build_counting_model(const CandidatePools& pools, const TextMap& texts,
                                   std::size_t vocab_cap = 100000);

// Sum of (count in text) x (type weight); abstains on empty text.
MaybeRawScore score_word_counting(const CountingModel& model, const TypeId& type,
                                  const TokenCounts& person_text);

// ---------------------------------------------------------------- word MLE

struct MleModel {
    Vocabulary vocab;                              // shared, cap 20,000
    std::map<TypeId, std::vector<double>> cond;    // P(w|type) over vocab
    std::optional<std::vector<double>> pseudo;     // P(w|p0), profession only
};

struct MleBuildOptions {
    std::size_t pseudo_sample_size = 10000;
    bool include_pseudo = true;
    double smoothing = 1e-9;
    std::uint64_t seed = 0;
    std::function<void(const std::string&)> log;
};

// P(w|type): normalized per-word tf-idf over the type's positive-candidate
// corpus, add-epsilon smoothed. Pseudo component from a random person sample.
MleModel build_mle_model(const CandidatePools& pools, const TextMap& texts,
                         const Vocabulary& vocab, const MleBuildOptions& opts = {});

struct MleEstimate {
    bool has_pseudo = false;
    std::vector<double> mixture;  // pseudo first when present, then the given types
    double log_likelihood = 0.0;
    int iterations = 0;
};

// EM over the fixed conditionals, uniform initialization; per-word weight is
// local count x global idf. Abstains when the text has no in-vocab token.
std::optional<MleEstimate> estimate_mle(const MleModel& model, const TokenCounts& person_text,
                                        const std::vector<TypeId>& person_types,
                                        int max_iter = 200, double tol = 1e-6,
                                        std::vector<double>* ll_trace = nullptr);

// ---------------------------------------------------------------- model io

void save_logistic_model(const std::string& path, const LogisticModel& model);
LogisticModel load_logistic_model(const std::string& path);
void save_counting_model(const std::string& path, const CountingModel& model);
CountingModel load_counting_model(const std::string& path);
void save_mle_model(const std::string& path, const MleModel& model);
MleModel load_mle_model(const std::string& path);

}  // namespace triplescore
