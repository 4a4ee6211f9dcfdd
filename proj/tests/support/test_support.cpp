#include "support/test_support.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <utility>

namespace unitsel::testing {

namespace fs = std::filesystem;

Codebook random_codebook(std::mt19937_64& rng, std::size_t k, std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> values(k * dim);
    for (auto& v : values) v = normal(rng);
    return Codebook(k, dim, std::move(values));
}

FeatureMatrix random_features(std::mt19937_64& rng, const std::string& id, std::size_t frames,
                              std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> values(frames * dim);
    for (auto& v : values) v = normal(rng);
    return FeatureMatrix(id, frames, dim, std::move(values));
}

Utterance random_utterance(std::mt19937_64& rng, const std::string& id, std::size_t frames,
                           std::uint32_t num_clusters, std::uint32_t alphabet, std::size_t dim) {
    std::uniform_int_distribution<std::uint32_t> pick(0, alphabet - 1);
    std::vector<std::uint32_t> units(frames);
    for (auto& u : units) u = pick(rng);
    return Utterance(UnitSequence(id, std::move(units), num_clusters), random_features(rng, id, frames, dim));
}

Utterance tagged_utterance(const std::string& id, const std::vector<std::uint32_t>& units,
                           std::uint32_t num_clusters, std::size_t dim, float utterance_tag) {
    std::vector<float> values(units.size() * dim, 0.0f);
    for (std::size_t t = 0; t < units.size(); ++t) {
        values[t * dim] = utterance_tag * 1000.0f + static_cast<float>(t);
    }
    return Utterance(UnitSequence(id, units, num_clusters), FeatureMatrix(id, units.size(), dim, std::move(values)));
}

Codebook line_codebook(std::size_t k, std::size_t dim) {
    std::vector<float> values(k * dim, 0.0f);
    for (std::size_t c = 0; c < k; ++c) values[c * dim] = static_cast<float>(c);
    return Codebook(k, dim, std::move(values));
}

std::uint32_t oracle_nearest(std::span<const float> frame, const Codebook& cb) {
    std::vector<double> dist(cb.num_clusters());
    for (std::size_t c = 0; c < cb.num_clusters(); ++c) {
        const auto centroid = cb.centroid(c);
        double acc = 0.0;
        for (std::size_t d = 0; d < frame.size(); ++d) {
            const double diff = static_cast<double>(frame[d]) - static_cast<double>(centroid[d]);
            acc += diff * diff;
        }
        dist[c] = acc;
    }
    return static_cast<std::uint32_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
}

std::uint32_t oracle_nearest_nonempty(std::uint32_t unit, const std::vector<std::uint32_t>& occupancy,
                                      const Codebook& cb) {
    if (occupancy[unit] > 0) return unit;
    std::vector<std::pair<double, std::uint32_t>> candidates;
    const auto target = cb.centroid(unit);
    for (std::uint32_t c = 0; c < occupancy.size(); ++c) {
        if (occupancy[c] == 0) continue;
        const auto centroid = cb.centroid(c);
        double acc = 0.0;
        for (std::size_t d = 0; d < target.size(); ++d) {
            const double diff = static_cast<double>(target[d]) - static_cast<double>(centroid[d]);
            acc += diff * diff;
        }
        candidates.emplace_back(acc, c);
    }
    std::sort(candidates.begin(), candidates.end());
    return candidates.front().second;
}

std::vector<Occurrence> oracle_find(const std::vector<Utterance>& utterances,
                                    const std::vector<std::uint32_t>& query) {
    constexpr std::uint32_t kSeparator = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> stream;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> origin;  // (utterance, frame) per stream slot
    for (std::uint32_t u = 0; u < utterances.size(); ++u) {
        const auto units = utterances[u].units().units();
        for (std::uint32_t t = 0; t < units.size(); ++t) {
            stream.push_back(units[t]);
            origin.emplace_back(u, t);
        }
        stream.push_back(kSeparator);
        origin.emplace_back(u, 0);
    }
    std::vector<Occurrence> out;
    auto it = stream.begin();
    while (true) {
        it = std::search(it, stream.end(), query.begin(), query.end());
        if (it == stream.end()) break;
        const auto pos = static_cast<std::size_t>(it - stream.begin());
        out.push_back(Occurrence{origin[pos].first, origin[pos].second});
        ++it;
    }
    return out;
}

std::string check_selection_invariants(const SelectionResult& result, const UnitSequence& predicted,
                                       const ReferencePool& pool, const Codebook& cb,
                                       const SelectionConfig& cfg) {
    std::ostringstream err;
    const std::size_t n = predicted.size();
    if (result.trace.size() != n) return "trace length differs from predicted length";
    if (result.features.num_frames() != n) return "feature rows differ from predicted length";
    if (result.features.dim() != pool.dim()) return "feature dimension differs from pool";

    auto same_frame = [&](std::size_t t, std::span<const float> expected) {
        const auto got = result.features.frame(t);
        return std::memcmp(got.data(), expected.data(), expected.size() * sizeof(float)) == 0;
    };

    std::size_t matched = 0;
    const std::vector<std::uint32_t> occupancy(pool.occupancy().begin(), pool.occupancy().end());
    for (std::size_t t = 0; t < n; ++t) {
        if (const auto* m = std::get_if<MatchedFrame>(&result.trace[t])) {
            ++matched;
            if (m->source.utterance >= pool.num_utterances() ||
                m->source.frame >= pool.utterance(m->source.utterance).num_frames()) {
                err << "matched frame " << t << " points outside the pool";
                return err.str();
            }
            if (pool.unit_at(m->source) != predicted[t]) {
                err << "matched frame " << t << " has source unit " << pool.unit_at(m->source)
                    << " but predicted unit " << predicted[t];
                return err.str();
            }
            if (!same_frame(t, pool.features_at(m->source))) {
                err << "matched frame " << t << " features are not the source frame";
                return err.str();
            }
            if (m->segment_id >= result.segments.size()) {
                err << "matched frame " << t << " names unknown segment " << m->segment_id;
                return err.str();
            }
        } else {
            const auto& s = std::get<SampledFrame>(result.trace[t]);
            if (s.requested_unit != predicted[t]) {
                err << "sampled frame " << t << " requested unit differs from prediction";
                return err.str();
            }
            if (occupancy[s.requested_unit] > 0 && s.resolved_cluster != s.requested_unit) {
                err << "sampled frame " << t << " resolved to " << s.resolved_cluster
                    << " although requested cluster " << s.requested_unit << " is nonempty";
                return err.str();
            }
            if (s.resolved_cluster != oracle_nearest_nonempty(s.requested_unit, occupancy, cb)) {
                err << "sampled frame " << t << " resolved to " << s.resolved_cluster
                    << ", not the nearest nonempty cluster";
                return err.str();
            }
            if (s.mode != cfg.sampling_mode) {
                err << "sampled frame " << t << " has the wrong mode";
                return err.str();
            }
            if (s.sources.empty()) {
                err << "sampled frame " << t << " has no sources";
                return err.str();
            }
            for (const auto& src : s.sources) {
                if (pool.unit_at(src) != s.resolved_cluster) {
                    err << "sampled frame " << t << " source is outside cluster " << s.resolved_cluster;
                    return err.str();
                }
            }
            if (s.mode == SamplingMode::kRandom) {
                if (s.sources.size() != 1 || !same_frame(t, pool.features_at(s.sources.front()))) {
                    err << "random-mode frame " << t << " is not a copy of its single source";
                    return err.str();
                }
            } else {
                const auto cluster = pool.frames_in_cluster(s.resolved_cluster);
                if (!std::equal(cluster.begin(), cluster.end(), s.sources.begin(), s.sources.end())) {
                    err << "average-mode frame " << t << " did not average its whole cluster";
                    return err.str();
                }
            }
        }
    }
    if (matched != result.matched_frames) return "matched_frames disagrees with the trace";

    std::vector<char> used(n, 0);
    for (std::size_t id = 0; id < result.segments.size(); ++id) {
        const auto& seg = result.segments[id];
        if (seg.length < cfg.min_len || seg.length > cfg.max_len) {
            err << "segment " << id << " length " << seg.length << " outside bounds";
            return err.str();
        }
        if (seg.start + seg.length > n) return "segment runs past the predicted sequence";
        if (seg.source.utterance >= pool.num_utterances() ||
            seg.source.start + seg.length > pool.utterance(seg.source.utterance).num_frames()) {
            err << "segment " << id << " source runs past its utterance";
            return err.str();
        }
        for (std::size_t j = 0; j < seg.length; ++j) {
            if (used[seg.start + j]) return "segments overlap";
            used[seg.start + j] = 1;
            const auto* m = std::get_if<MatchedFrame>(&result.trace[seg.start + j]);
            const FrameRef expected{seg.source.utterance, static_cast<std::uint32_t>(seg.source.start + j)};
            if (m == nullptr || m->segment_id != id || m->source != expected) {
                err << "segment " << id << " is not contiguous in trace/source at offset " << j;
                return err.str();
            }
        }
    }
    return {};
}

TempDir::TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        fs::path candidate = base / ("unitsel-test-" + std::to_string(rng()));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::vector<std::byte> file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(chars.size());
    std::memcpy(out.data(), chars.data(), chars.size());
    return out;
}

void write_bytes(const fs::path& path, const std::vector<std::byte>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace unitsel::testing
