#include "unitsel/frame_selection.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <string>

#include "random.hpp"
#include "unitsel/error.hpp"
#include "unitsel/unit_tokenizer.hpp"

namespace unitsel {

std::string_view to_string(SamplingMode mode) {
    return mode == SamplingMode::kRandom ? "rand" : "avg";
}

std::string_view to_string(OccurrencePolicy policy) {
    return policy == OccurrencePolicy::kEarliest ? "earliest" : "random";
}

SamplingMode parse_sampling_mode(std::string_view text) {
    if (text == "rand" || text == "random") return SamplingMode::kRandom;
    if (text == "avg" || text == "average") return SamplingMode::kAverage;
    throw Error(ErrorCode::kInvalidArgument,
                "sampling mode must be 'avg' or 'rand', got '" + std::string(text) + "'");
}

OccurrencePolicy parse_occurrence_policy(std::string_view text) {
    if (text == "earliest") return OccurrencePolicy::kEarliest;
    if (text == "random" || text == "seeded_random") return OccurrencePolicy::kSeededRandom;
    throw Error(ErrorCode::kInvalidArgument,
                "occurrence policy must be 'earliest' or 'random', got '" + std::string(text) + "'");
}

namespace {

void check_binding(const ReferencePool& pool, const Codebook& cb) {
    if (pool.codebook_fingerprint() != cb.fingerprint()) {
        throw Error(ErrorCode::kCodebookMismatch, "reference pool was built with a different codebook");
    }
}

void check_inputs(const UnitSequence& predicted, const ReferencePool& pool, const Codebook& cb,
                  const SelectionConfig& cfg) {
    check_binding(pool, cb);
    if (predicted.size() == 0) {
        throw Error(ErrorCode::kEmptyInput, "predicted unit sequence '" + predicted.utterance_id() + "' is empty");
    }
    if (predicted.num_clusters() != cb.num_clusters()) {
        throw Error(ErrorCode::kCodebookMismatch,
                    "predicted units declare K = " + std::to_string(predicted.num_clusters()) +
                        ", codebook K = " + std::to_string(cb.num_clusters()));
    }
    if (cfg.min_len < 1 || cfg.min_len > cfg.max_len) {
        throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_len <= max_len");
    }
    if (cfg.min_len < pool.min_len() || cfg.max_len > pool.max_len()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "match lengths [" + std::to_string(cfg.min_len) + ", " + std::to_string(cfg.max_len) +
                        "] exceed the pool's index range [" + std::to_string(pool.min_len()) + ", " +
                        std::to_string(pool.max_len()) + "]");
    }
}

std::vector<MatchedSegment> greedy_cover(const UnitSequence& predicted, const ReferencePool& pool,
                                         const SelectionConfig& cfg, std::mt19937_64& rng) {
    const auto units = predicted.units();
    const std::size_t n = units.size();
    std::vector<char> covered(n, 0);
    std::vector<MatchedSegment> segments;

    for (std::size_t len = cfg.max_len; len >= cfg.min_len; --len) {
        if (len <= n) {
            std::size_t i = 0;
            while (i + len <= n) {
                const auto first_covered = std::find(covered.begin() + i, covered.begin() + i + len, 1);
                if (first_covered != covered.begin() + i + len) {
                    // No window starting at or before this position is eligible.
                    i = static_cast<std::size_t>(first_covered - covered.begin()) + 1;
                    continue;
                }
                const auto occurrences = pool.find_occurrences(units.subspan(i, len));
                if (occurrences.empty()) {
                    ++i;
                    continue;
                }
                const Occurrence chosen =
                    cfg.occurrence_policy == OccurrencePolicy::kEarliest
                        ? occurrences.front()
                        : occurrences[detail::uniform_index(rng, occurrences.size())];
                std::fill(covered.begin() + i, covered.begin() + i + len, 1);
                segments.push_back(MatchedSegment{i, len, chosen});
                i += len;
            }
        }
    }
    return segments;
}

}  // namespace

std::vector<MatchedSegment> subsequence_match(const UnitSequence& predicted, const ReferencePool& pool,
                                              const Codebook& cb, const SelectionConfig& cfg,
                                              std::mt19937_64& rng) {
    check_inputs(predicted, pool, cb, cfg);
    return greedy_cover(predicted, pool, cfg, rng);
}

SampledFeature inverse_kmeans_sample(std::uint32_t unit, const ReferencePool& pool, const Codebook& cb,
                                     SamplingMode mode, std::mt19937_64& rng) {
    check_binding(pool, cb);
    const std::uint32_t cluster = nearest_nonempty_cluster(unit, pool.occupancy(), cb);
    const auto frames = pool.frames_in_cluster(cluster);

    SampledFeature out;
    out.provenance.requested_unit = unit;
    out.provenance.resolved_cluster = cluster;
    out.provenance.mode = mode;

    if (mode == SamplingMode::kRandom) {
        const FrameRef pick = frames[detail::uniform_index(rng, frames.size())];
        const auto values = pool.features_at(pick);
        out.values.assign(values.begin(), values.end());
        out.provenance.sources = {pick};
        return out;
    }

    std::vector<double> sum(pool.dim(), 0.0);
    for (const FrameRef& ref : frames) {
        const auto values = pool.features_at(ref);
        for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += values[d];
    }
    const double inv = 1.0 / static_cast<double>(frames.size());
    out.values.resize(sum.size());
    for (std::size_t d = 0; d < sum.size(); ++d) out.values[d] = static_cast<float>(sum[d] * inv);
    out.provenance.sources.assign(frames.begin(), frames.end());
    return out;
}

SelectionResult select_frames(const UnitSequence& predicted, const ReferencePool& pool,
                              const Codebook& cb, const SelectionConfig& cfg) {
    check_inputs(predicted, pool, cb, cfg);
    std::mt19937_64 rng(cfg.seed);

    const std::size_t n = predicted.size();
    const std::size_t dim = pool.dim();
    std::vector<float> values(n * dim);
    std::vector<FrameProvenance> trace(n);
    std::vector<char> filled(n, 0);

    auto segments = greedy_cover(predicted, pool, cfg, rng);
    std::size_t matched = 0;
    for (std::size_t id = 0; id < segments.size(); ++id) {
        const auto& seg = segments[id];
        for (std::size_t j = 0; j < seg.length; ++j) {
            const FrameRef src{seg.source.utterance, static_cast<std::uint32_t>(seg.source.start + j)};
            const auto frame = pool.features_at(src);
            std::copy(frame.begin(), frame.end(), values.begin() + static_cast<std::ptrdiff_t>((seg.start + j) * dim));
            trace[seg.start + j] = MatchedFrame{id, src};
            filled[seg.start + j] = 1;
        }
        matched += seg.length;
    }

    for (std::size_t t = 0; t < n; ++t) {
        if (filled[t]) continue;
        auto sampled = inverse_kmeans_sample(predicted[t], pool, cb, cfg.sampling_mode, rng);
        std::copy(sampled.values.begin(), sampled.values.end(),
                  values.begin() + static_cast<std::ptrdiff_t>(t * dim));
        trace[t] = std::move(sampled.provenance);
    }

    const int hop = pool.utterance(0).features().frame_hop_ms();
    return SelectionResult{FeatureMatrix(predicted.utterance_id(), n, dim, std::move(values), hop),
                           std::move(trace), std::move(segments), matched};
}

std::vector<LeaveOneOutPair> leave_one_out_pairs(std::span<const Utterance> speaker_utterances,
                                                 const Codebook& cb, const SelectionConfig& cfg) {
    std::vector<LeaveOneOutPair> out;
    if (speaker_utterances.size() < 2) {
        spdlog::warn("leave-one-out: skipping speaker with {} utterance(s); no sibling to pool",
                     speaker_utterances.size());
        return out;
    }
    out.reserve(speaker_utterances.size());
    for (std::size_t i = 0; i < speaker_utterances.size(); ++i) {
        std::vector<Utterance> refs;
        refs.reserve(speaker_utterances.size() - 1);
        for (std::size_t j = 0; j < speaker_utterances.size(); ++j) {
            if (j != i) refs.push_back(speaker_utterances[j]);
        }
        const ReferencePool pool = build_pool(std::move(refs), cb, cfg.min_len, cfg.max_len);
        const Utterance& target = speaker_utterances[i];
        out.push_back(LeaveOneOutPair{target.id(), select_frames(target.units(), pool, cb, cfg)});
    }
    return out;
}

}  // namespace unitsel
