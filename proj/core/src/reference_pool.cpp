#include "unitsel/reference_pool.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "unitsel/error.hpp"

namespace unitsel {

namespace {

constexpr std::uint64_t kWindowHashSeed = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t extend_hash(std::uint64_t h, std::uint32_t unit) noexcept {
    h ^= std::uint64_t{unit} + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    return h ^ (h >> 33);
}

std::uint64_t window_hash(std::span<const std::uint32_t> window) noexcept {
    std::uint64_t h = kWindowHashSeed;
    for (std::uint32_t u : window) h = extend_hash(h, u);
    return h;
}

// Calls fn(L, hash, occurrence) for every window of length [min_len, max_len],
// in (utterance, start) order for each L.
template <typename Fn>
void for_each_window(std::span<const Utterance> utterances, std::size_t min_len,
                     std::size_t max_len, Fn&& fn) {
    for (std::size_t u = 0; u < utterances.size(); ++u) {
        const auto units = utterances[u].units().units();
        for (std::size_t s = 0; s < units.size(); ++s) {
            std::uint64_t h = kWindowHashSeed;
            const std::size_t longest = std::min(max_len, units.size() - s);
            for (std::size_t len = 1; len <= longest; ++len) {
                h = extend_hash(h, units[s + len - 1]);
                if (len >= min_len) {
                    fn(len, h,
                       Occurrence{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(s)});
                }
            }
        }
    }
}

}  // namespace

ReferencePool build_pool(std::vector<Utterance> refs, const Codebook& cb, std::size_t min_len,
                         std::size_t max_len) {
    if (refs.empty()) throw Error(ErrorCode::kEmptyInput, "reference pool needs at least one utterance");
    if (min_len < 1 || min_len > max_len) {
        throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_len <= max_len, got " +
                                                     std::to_string(min_len) + ", " +
                                                     std::to_string(max_len));
    }

    ReferencePool pool;
    const std::size_t k = cb.num_clusters();
    std::size_t total = 0;
    for (const auto& utt : refs) {
        if (utt.units().num_clusters() != k) {
            throw Error(ErrorCode::kCodebookMismatch,
                        "utterance '" + utt.id() + "' was tokenized with K = " +
                            std::to_string(utt.units().num_clusters()) + ", codebook K = " +
                            std::to_string(k));
        }
        if (utt.features().dim() != cb.dim()) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "utterance '" + utt.id() + "' has D = " + std::to_string(utt.features().dim()) +
                            ", codebook D = " + std::to_string(cb.dim()));
        }
        total += utt.num_frames();
    }
    if (total == 0) throw Error(ErrorCode::kEmptyInput, "reference pool has no frames");
    if (total > std::numeric_limits<std::uint32_t>::max() || refs.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::kInvalidArgument, "reference pool too large for 32-bit frame refs");
    }

    pool.utterances_ = std::move(refs);
    pool.total_frames_ = total;
    pool.min_len_ = min_len;
    pool.max_len_ = max_len;
    pool.dim_ = cb.dim();
    pool.codebook_fingerprint_ = cb.fingerprint();

    // Cluster index, CSR layout.
    pool.occupancy_.assign(k, 0);
    for (const auto& utt : pool.utterances_) {
        for (std::uint32_t unit : utt.units().units()) ++pool.occupancy_[unit];
    }
    pool.cluster_offsets_.assign(k + 1, 0);
    for (std::size_t c = 0; c < k; ++c) {
        pool.cluster_offsets_[c + 1] = pool.cluster_offsets_[c] + pool.occupancy_[c];
    }
    pool.cluster_frames_.resize(total);
    std::vector<std::uint32_t> cursor(pool.cluster_offsets_.begin(), pool.cluster_offsets_.end() - 1);
    for (std::size_t u = 0; u < pool.utterances_.size(); ++u) {
        const auto units = pool.utterances_[u].units().units();
        for (std::size_t t = 0; t < units.size(); ++t) {
            pool.cluster_frames_[cursor[units[t]]++] =
                FrameRef{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(t)};
        }
    }

    // N-gram index: count per (L, hash), lay out slices, then fill in scan
    // order so every slice is sorted by (utterance, start).
    const std::size_t num_lengths = max_len - min_len + 1;
    pool.ngram_maps_.assign(num_lengths, {});
    std::size_t num_windows = 0;
    for_each_window(pool.utterances_, min_len, max_len,
                    [&](std::size_t len, std::uint64_t h, Occurrence) {
                        ++pool.ngram_maps_[len - min_len][h].count;
                        ++num_windows;
                    });
    std::uint32_t offset = 0;
    for (auto& map : pool.ngram_maps_) {
        for (auto& [h, range] : map) {
            range.offset = offset;
            offset += range.count;
            range.count = 0;
        }
    }
    pool.ngram_occurrences_.resize(num_windows);
    for_each_window(pool.utterances_, min_len, max_len,
                    [&](std::size_t len, std::uint64_t h, Occurrence occ) {
                        auto& range = pool.ngram_maps_[len - min_len].find(h)->second;
                        pool.ngram_occurrences_[range.offset + range.count++] = occ;
                    });
    return pool;
}

bool ReferencePool::window_matches(Occurrence at, std::span<const std::uint32_t> query) const {
    const auto units = utterances_[at.utterance].units().units();
    if (at.start + query.size() > units.size()) return false;
    return std::equal(query.begin(), query.end(), units.begin() + at.start);
}

std::vector<Occurrence> ReferencePool::find_occurrences(std::span<const std::uint32_t> query) const {
    if (query.size() < min_len_ || query.size() > max_len_) {
        throw Error(ErrorCode::kInvalidArgument,
                    "query length " + std::to_string(query.size()) + " outside [" +
                        std::to_string(min_len_) + ", " + std::to_string(max_len_) + "]");
    }
    std::vector<Occurrence> out;
    const auto& map = ngram_maps_[query.size() - min_len_];
    const auto it = map.find(window_hash(query));
    if (it == map.end()) return out;
    const auto slice =
        std::span(ngram_occurrences_).subspan(it->second.offset, it->second.count);
    for (const Occurrence& occ : slice) {
        if (window_matches(occ, query)) out.push_back(occ);
    }
    return out;
}

std::span<const FrameRef> ReferencePool::frames_in_cluster(std::uint32_t unit) const {
    if (unit >= occupancy_.size()) {
        throw Error(ErrorCode::kUnitOutOfRange, "unit " + std::to_string(unit) +
                                                    " is not below K = " +
                                                    std::to_string(occupancy_.size()));
    }
    return std::span(cluster_frames_)
        .subspan(cluster_offsets_[unit], cluster_offsets_[unit + 1] - cluster_offsets_[unit]);
}

std::vector<Occurrence> brute_force_find(const ReferencePool& pool,
                                         std::span<const std::uint32_t> query) {
    if (query.size() < pool.min_len() || query.size() > pool.max_len()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "query length " + std::to_string(query.size()) + " outside [" +
                        std::to_string(pool.min_len()) + ", " + std::to_string(pool.max_len()) + "]");
    }
    std::vector<Occurrence> out;
    for (std::size_t u = 0; u < pool.num_utterances(); ++u) {
        const auto units = pool.utterance(u).units().units();
        for (std::size_t s = 0; s + query.size() <= units.size(); ++s) {
            bool match = true;
            for (std::size_t j = 0; j < query.size(); ++j) {
                if (units[s + j] != query[j]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                out.push_back(Occurrence{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(s)});
            }
        }
    }
    return out;
}

}  // namespace unitsel
