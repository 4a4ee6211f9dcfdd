#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unitsel/feature_store.hpp"
#include "unitsel/frame_selection.hpp"
#include "unitsel/reference_pool.hpp"

namespace unitsel {

// Feature-space proxy metrics for one reconstructed utterance.
struct ReconReport {
    std::string utterance_id;
    double coverage = 0.0;
    // Per-frame cosine between selected and ground-truth features, averaged.
    // Two zero vectors count as 1, one zero vector as 0.
    double mean_cosine = 0.0;
    // Squared error averaged over all frames and dimensions.
    double mean_sq_err = 0.0;
    // Sampled frames whose resolved cluster equals the requested unit; 1 when
    // nothing was sampled.
    double cluster_hit_rate = 1.0;
    std::size_t sampled_frames = 0;
    std::size_t pool_frames = 0;
    double pool_seconds = 0.0;
};

// Selects frames for the target's own units and compares them with its
// ground-truth features.
ReconReport reconstruction_eval(const Utterance& target, const ReferencePool& pool, const Codebook& cb,
                                const SelectionConfig& cfg);

struct DurationSpec {
    std::string label;
    std::size_t frame_budget = 0;
};

// "30s", "1min", "3min", "5min", or any "<n>s" / "<n>min".
DurationSpec parse_duration(std::string_view token, int frame_hop_ms = kDefaultFrameHopMs);
// Comma-separated list of the above.
std::vector<DurationSpec> parse_durations(std::string_view csv, int frame_hop_ms = kDefaultFrameHopMs);

// Whole utterances in order until at least `frame_budget` frames are taken.
struct TruncatedReferences {
    std::vector<Utterance> utterances;
    std::size_t frames = 0;
    bool used_all_material = false;  // fewer frames available than the budget
};
TruncatedReferences truncate_references(std::span<const Utterance> refs, std::size_t frame_budget);

// One speaker's evaluation material: targets are reconstructed from pools cut
// out of `references`.
struct SpeakerSplit {
    std::string speaker_id;
    std::vector<Utterance> targets;
    std::vector<Utterance> references;
};

struct SweepRow {
    std::string duration_label;
    std::size_t frame_budget = 0;
    std::size_t n_targets = 0;
    double mean_coverage = 0.0;
    double mean_cosine = 0.0;
    double mean_mse = 0.0;
    double mean_cluster_hit_rate = 0.0;
    double mean_pool_seconds = 0.0;
    bool used_all_material = false;  // true if any speaker ran out of material
};

// Averages reports in utterance-id order, so the result does not depend on
// the order of `reports`.
SweepRow average_reports(std::string label, std::size_t frame_budget, std::vector<ReconReport> reports,
                         bool used_all_material);

// One averaged row per duration over every target of every speaker.
std::vector<SweepRow> reference_duration_sweep(std::span<const SpeakerSplit> speakers,
                                               std::span<const DurationSpec> durations, const Codebook& cb,
                                               const SelectionConfig& cfg, std::size_t threads = 1);

nlohmann::ordered_json sweep_to_json(std::span<const SweepRow> rows);
std::string sweep_to_table(std::span<const SweepRow> rows);

}  // namespace unitsel
