#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unitsel/feature_store.hpp"
#include "unitsel/reference_pool.hpp"

namespace unitsel {

// How an uncovered frame is recovered from its cluster.
enum class SamplingMode { kRandom, kAverage };
// Which occurrence backs a match when the window occurs several times.
enum class OccurrencePolicy { kEarliest, kSeededRandom };

std::string_view to_string(SamplingMode mode);
std::string_view to_string(OccurrencePolicy policy);
SamplingMode parse_sampling_mode(std::string_view text);        // "rand" | "avg"
OccurrencePolicy parse_occurrence_policy(std::string_view text);  // "earliest" | "random"

struct SelectionConfig {
    std::size_t max_len = kDefaultMaxMatchLen;
    std::size_t min_len = kDefaultMinMatchLen;
    SamplingMode sampling_mode = SamplingMode::kAverage;
    OccurrencePolicy occurrence_policy = OccurrencePolicy::kEarliest;
    std::uint64_t seed = 0;
};

// A run of predicted positions [start, start + length) copied from the pool
// utterance `source.utterance` starting at frame `source.start`.
struct MatchedSegment {
    std::size_t start = 0;
    std::size_t length = 0;
    Occurrence source;

    friend bool operator==(const MatchedSegment&, const MatchedSegment&) = default;
};

struct MatchedFrame {
    std::size_t segment_id = 0;
    FrameRef source;

    friend bool operator==(const MatchedFrame&, const MatchedFrame&) = default;
};

struct SampledFrame {
    std::uint32_t requested_unit = 0;
    std::uint32_t resolved_cluster = 0;
    SamplingMode mode = SamplingMode::kAverage;
    // The drawn frame (random) or every frame averaged (average).
    std::vector<FrameRef> sources;

    friend bool operator==(const SampledFrame&, const SampledFrame&) = default;
};

using FrameProvenance = std::variant<MatchedFrame, SampledFrame>;

struct SelectionResult {
    FeatureMatrix features;
    std::vector<FrameProvenance> trace;
    std::vector<MatchedSegment> segments;
    std::size_t matched_frames = 0;

    // Fraction of frames with matched provenance.
    double coverage() const noexcept {
        return trace.empty() ? 0.0
                             : static_cast<double>(matched_frames) / static_cast<double>(trace.size());
    }

    friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

// Greedy longest-first cover. For L = max_len .. min_len, windows are scanned
// left to right; an all-uncovered window that occurs in the pool is taken and
// the scan resumes after it. Segments are returned in selection order.
// `rng` is consumed only under OccurrencePolicy::kSeededRandom.
std::vector<MatchedSegment> subsequence_match(const UnitSequence& predicted, const ReferencePool& pool,
                                              const Codebook& cb, const SelectionConfig& cfg,
                                              std::mt19937_64& rng);

struct SampledFeature {
    std::vector<float> values;
    SampledFrame provenance;
};

// Recovers a continuous frame for `unit` from the nearest nonempty cluster.
SampledFeature inverse_kmeans_sample(std::uint32_t unit, const ReferencePool& pool, const Codebook& cb,
                                     SamplingMode mode, std::mt19937_64& rng);

// Matching then sampling over one seeded generator; a pure function of the
// arguments.
SelectionResult select_frames(const UnitSequence& predicted, const ReferencePool& pool,
                              const Codebook& cb, const SelectionConfig& cfg);

struct LeaveOneOutPair {
    std::string utterance_id;
    SelectionResult selection;
};

// For every utterance with at least one sibling: pool the others and select
// frames for its own units. A speaker with a single utterance yields nothing.
std::vector<LeaveOneOutPair> leave_one_out_pairs(std::span<const Utterance> speaker_utterances,
                                                 const Codebook& cb, const SelectionConfig& cfg);

}  // namespace unitsel
