#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unitsel/eval_harness.hpp"
#include "unitsel/feature_store.hpp"

namespace unitsel {

// Seeded stand-in for tokenized speech. Utterances are concatenations of
// "phrases" (fixed unit strings) drawn from a Zipf distribution, so common
// phrases recur across utterances the way words do. Each frame is its unit's
// centroid plus a per-speaker offset, a per-(phrase, position) context
// vector and noise; units are then re-derived with assign_units.
struct SyntheticCorpusConfig {
    std::size_t num_speakers = 10;
    std::size_t num_clusters = 2000;
    std::size_t dim = 16;
    std::size_t num_phrases = 300;
    std::size_t min_phrase_len = 4;
    std::size_t max_phrase_len = 12;
    double zipf_exponent = 1.0;
    std::size_t min_utterance_frames = 150;
    std::size_t max_utterance_frames = 400;
    // Reference material per speaker; 9500 frames is a little over 3 minutes
    // at a 20 ms hop.
    std::size_t reference_frames_per_speaker = 9500;
    std::size_t targets_per_speaker = 5;
    double centroid_scale = 2.0;
    double speaker_scale = 0.1;
    double context_scale = 0.1;
    double noise_scale = 0.03;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct SyntheticCorpus {
    Codebook codebook;
    std::vector<SpeakerSplit> speakers;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& cfg);

}  // namespace unitsel
