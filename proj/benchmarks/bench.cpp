#include <benchmark/benchmark.h>

#include <random>

#include "triplescore/path_ranking.hpp"
#include "triplescore/score_mapping.hpp"
#include "triplescore/text_scorers.hpp"

using namespace triplescore;

namespace {

std::vector<KgTriple> random_graph(std::size_t n_nodes, std::size_t n_edges, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<KgTriple> triples;
    triples.reserve(n_edges);
    for (std::size_t i = 0; i < n_edges; ++i)
        triples.push_back({"e" + std::to_string(rng() % n_nodes),
                           "r" + std::to_string(rng() % 6),
                           "e" + std::to_string(rng() % n_nodes)});
    return triples;
}

void bm_extract_paths(benchmark::State& state) {
    std::size_t nodes = static_cast<std::size_t>(state.range(0));
    KbGraph g(random_graph(nodes, nodes * 4, 9));
    for (auto _ : state) {
        auto paths = extract_paths(g, "e0", "e1", 3, true);
        benchmark::DoNotOptimize(paths);
    }
}
BENCHMARK(bm_extract_paths)->Arg(50)->Arg(200)->Arg(800);

MleModel synthetic_mle(std::size_t v, std::size_t k) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    MleModel model;
    model.vocab.n_docs = 1;
    for (std::size_t j = 0; j < v; ++j) {
        std::string tok = "w" + std::to_string(j);
        model.vocab.index[tok] = j;
        model.vocab.tokens.push_back(tok);
        model.vocab.df.push_back(1);
    }
    for (std::size_t t = 0; t < k; ++t) {
        std::vector<double> dist(v);
        double sum = 0.0;
        for (auto& d : dist) sum += d = unit(rng);
        for (auto& d : dist) d /= sum;
        model.cond["T" + std::to_string(t)] = dist;
    }
    return model;
}

void bm_estimate_mle(benchmark::State& state) {
    std::size_t v = static_cast<std::size_t>(state.range(0));
    auto model = synthetic_mle(v, 3);
    std::mt19937_64 rng(12);
    TokenCounts text;
    for (std::size_t j = 0; j < v; j += 2)
        text["w" + std::to_string(j)] = 1 + static_cast<std::int64_t>(rng() % 9);
    std::vector<TypeId> types{"T0", "T1", "T2"};
    for (auto _ : state) {
        auto est = estimate_mle(model, text, types);
        benchmark::DoNotOptimize(est);
    }
}
BENCHMARK(bm_estimate_mle)->Arg(100)->Arg(1000)->Arg(10000);

void bm_mapping(benchmark::State& state) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> inputs(4096);
    for (auto& [s, s_max] : inputs) {
        s_max = unit(rng) * 100.0 + 1e-9;
        s = unit(rng) * s_max;
    }
    for (auto _ : state) {
        int acc = 0;
        for (const auto& [s, s_max] : inputs)
            acc += map_linear(s, s_max) + map_log(s, s_max) + map_scale(s / s_max);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(bm_mapping);

}  // namespace

BENCHMARK_MAIN();
