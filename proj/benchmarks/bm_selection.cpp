#include <benchmark/benchmark.h>

#include "unitsel/eval_harness.hpp"
#include "unitsel/frame_selection.hpp"
#include "unitsel/synthetic_corpus.hpp"
#include "unitsel/unit_tokenizer.hpp"

namespace {

using namespace unitsel;

const SyntheticCorpus& corpus() {
    static const SyntheticCorpus c = [] {
        SyntheticCorpusConfig cfg;
        cfg.num_speakers = 1;
        return generate_synthetic_corpus(cfg);
    }();
    return c;
}

void BM_AssignUnits(benchmark::State& state) {
    const auto& c = corpus();
    const auto& features = c.speakers[0].references[0].features();
    for (auto _ : state) {
        benchmark::DoNotOptimize(assign_units(features, c.codebook));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(features.num_frames()));
}
BENCHMARK(BM_AssignUnits)->Unit(benchmark::kMillisecond);

void BM_SelectFrames(benchmark::State& state) {
    const auto& c = corpus();
    const auto& speaker = c.speakers[0];
    const ReferencePool pool = build_pool(speaker.references, c.codebook);
    SelectionConfig cfg;
    cfg.sampling_mode = state.range(0) ? SamplingMode::kRandom : SamplingMode::kAverage;
    for (auto _ : state) {
        for (const auto& target : speaker.targets) {
            benchmark::DoNotOptimize(select_frames(target.units(), pool, c.codebook, cfg));
        }
    }
}
BENCHMARK(BM_SelectFrames)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
