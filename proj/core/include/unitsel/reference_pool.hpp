#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "unitsel/feature_store.hpp"

namespace unitsel {

inline constexpr std::size_t kDefaultMinMatchLen = 2;
inline constexpr std::size_t kDefaultMaxMatchLen = 10;

// A single frame of the pool, addressed by utterance ordinal and position.
struct FrameRef {
    std::uint32_t utterance = 0;
    std::uint32_t frame = 0;

    friend auto operator<=>(const FrameRef&, const FrameRef&) = default;
};

// Start of an exact unit-window match inside one pool utterance.
struct Occurrence {
    std::uint32_t utterance = 0;
    std::uint32_t start = 0;

    friend auto operator<=>(const Occurrence&, const Occurrence&) = default;
};

// Immutable index over one speaker's reference frames. Answers exact
// unit-window lookups for window lengths in [min_len, max_len] and
// cluster -> frames lookups. Matches never cross utterance boundaries.
class ReferencePool {
public:
    std::size_t num_utterances() const noexcept { return utterances_.size(); }
    const Utterance& utterance(std::size_t ordinal) const { return utterances_.at(ordinal); }
    std::span<const Utterance> utterances() const noexcept { return utterances_; }

    std::size_t total_frames() const noexcept { return total_frames_; }
    std::size_t min_len() const noexcept { return min_len_; }
    std::size_t max_len() const noexcept { return max_len_; }
    std::size_t num_clusters() const noexcept { return occupancy_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t codebook_fingerprint() const noexcept { return codebook_fingerprint_; }

    std::uint32_t unit_at(FrameRef ref) const { return utterances_[ref.utterance].units()[ref.frame]; }
    std::span<const float> features_at(FrameRef ref) const {
        return utterances_[ref.utterance].features().frame(ref.frame);
    }

    // Frames per cluster, length K.
    std::span<const std::uint32_t> occupancy() const noexcept { return occupancy_; }

    // All positions where `query` occurs, ordered by (utterance, start).
    std::vector<Occurrence> find_occurrences(std::span<const std::uint32_t> query) const;

    // Frames whose unit equals `unit`, ordered by (utterance, frame).
    std::span<const FrameRef> frames_in_cluster(std::uint32_t unit) const;

private:
    friend ReferencePool build_pool(std::vector<Utterance> refs, const Codebook& cb,
                                    std::size_t min_len, std::size_t max_len);

    struct Range {
        std::uint32_t offset;
        std::uint32_t count;
    };

    ReferencePool() = default;
    bool window_matches(Occurrence at, std::span<const std::uint32_t> query) const;

    std::vector<Utterance> utterances_;
    std::size_t total_frames_ = 0;
    std::size_t min_len_ = 0;
    std::size_t max_len_ = 0;
    std::size_t dim_ = 0;
    std::uint64_t codebook_fingerprint_ = 0;

    std::vector<std::uint32_t> occupancy_;
    std::vector<std::uint32_t> cluster_offsets_;  // K + 1
    std::vector<FrameRef> cluster_frames_;

    // Per window length L (index L - min_len): window hash -> slice of
    // ngram_occurrences_. Hash collisions are resolved by comparing units.
    std::vector<std::unordered_map<std::uint64_t, Range>> ngram_maps_;
    std::vector<Occurrence> ngram_occurrences_;
};

// Builds the pool. Deterministic in input order. Unit ids must be below the
// codebook's K and features must have the codebook's D.
ReferencePool build_pool(std::vector<Utterance> refs, const Codebook& cb,
                         std::size_t min_len = kDefaultMinMatchLen,
                         std::size_t max_len = kDefaultMaxMatchLen);

// Naive O(total_frames * |query|) scan with the find_occurrences contract.
std::vector<Occurrence> brute_force_find(const ReferencePool& pool,
                                         std::span<const std::uint32_t> query);

// Pool cache ("USPL"): the utterances plus build parameters. Loading rebuilds
// the index, so queries match a pool rebuilt from the manifest.
void write_pool_cache(const ReferencePool& pool, const std::filesystem::path& path);
ReferencePool read_pool_cache(const std::filesystem::path& path, const Codebook& cb);

}  // namespace unitsel
