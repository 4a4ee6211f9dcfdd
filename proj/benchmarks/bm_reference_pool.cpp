#include <benchmark/benchmark.h>

#include <random>

#include "unitsel/reference_pool.hpp"

namespace {

using namespace unitsel;

struct Fixture {
    Codebook cb;
    ReferencePool pool;
    std::vector<std::vector<std::uint32_t>> queries;
};

// 100k frames over 400 utterances, units drawn from 200 symbols of a K=2000 codebook.
const Fixture& fixture() {
    static const Fixture f = [] {
        std::mt19937_64 rng(5);
        constexpr std::uint32_t k = 2000;
        std::vector<float> centroids(k * 2);
        for (auto& v : centroids) v = static_cast<float>(rng() % 1000) / 100.0f;
        Codebook cb(k, 2, std::move(centroids));
        std::vector<Utterance> refs;
        for (int u = 0; u < 400; ++u) {
            const std::string id = "u" + std::to_string(u);
            std::vector<std::uint32_t> units(250);
            for (auto& x : units) x = static_cast<std::uint32_t>(rng() % 200);
            refs.emplace_back(UnitSequence(id, units, k), FeatureMatrix(id, 250, 2, std::vector<float>(500, 0.0f)));
        }
        std::vector<std::vector<std::uint32_t>> queries;
        for (int q = 0; q < 256; ++q) {
            const auto units = refs[rng() % refs.size()].units().units();
            const std::size_t len = 2 + q % 9;
            const std::size_t start = rng() % (units.size() - len);
            queries.emplace_back(units.begin() + start, units.begin() + start + len);
        }
        auto pool = build_pool(std::move(refs), cb);
        return Fixture{std::move(cb), std::move(pool), std::move(queries)};
    }();
    return f;
}

void BM_FindOccurrences(benchmark::State& state) {
    const auto& f = fixture();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.pool.find_occurrences(f.queries[i++ % f.queries.size()]));
    }
}
BENCHMARK(BM_FindOccurrences);

void BM_BruteForceFind(benchmark::State& state) {
    const auto& f = fixture();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(brute_force_find(f.pool, f.queries[i++ % f.queries.size()]));
    }
}
BENCHMARK(BM_BruteForceFind);

void BM_BuildPool(benchmark::State& state) {
    const auto& f = fixture();
    const std::vector<Utterance> refs(f.pool.utterances().begin(), f.pool.utterances().end());
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_pool(refs, f.cb));
    }
}
BENCHMARK(BM_BuildPool)->Unit(benchmark::kMillisecond);

}  // namespace
