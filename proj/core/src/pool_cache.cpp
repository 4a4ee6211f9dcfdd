#include <string>

#include "binary_io.hpp"
#include "unitsel/error.hpp"
#include "unitsel/reference_pool.hpp"

namespace unitsel {

namespace {

constexpr char kPoolMagic[4] = {'U', 'S', 'P', 'L'};
constexpr std::uint32_t kPoolVersion = 1;

}  // namespace

void write_pool_cache(const ReferencePool& pool, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.magic(kPoolMagic);
    w.u32(kPoolVersion);
    w.u32(static_cast<std::uint32_t>(pool.min_len()));
    w.u32(static_cast<std::uint32_t>(pool.max_len()));
    w.u32(static_cast<std::uint32_t>(pool.num_clusters()));
    w.u32(static_cast<std::uint32_t>(pool.dim()));
    w.u64(pool.codebook_fingerprint());
    w.u32(static_cast<std::uint32_t>(pool.num_utterances()));
    for (const auto& utt : pool.utterances()) {
        w.string(utt.id());
        w.u32(static_cast<std::uint32_t>(utt.num_frames()));
        for (std::uint32_t unit : utt.units().units()) w.u32(unit);
        for (float v : utt.features().values()) w.f32(v);
    }
    detail::write_file_atomic(path, std::move(w).take());
}

ReferencePool read_pool_cache(const std::filesystem::path& path, const Codebook& cb) {
    const auto bytes = detail::read_file_bytes(path);
    detail::ByteReader r(bytes, "pool cache '" + path.string() + "'");
    r.expect_magic(kPoolMagic);
    const std::uint32_t version = r.u32("version");
    if (version != kPoolVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    r.what() + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t min_len = r.u32("min_len");
    const std::uint32_t max_len = r.u32("max_len");
    const std::uint32_t num_clusters = r.u32("K");
    const std::uint32_t dim = r.u32("D");
    const std::uint64_t fingerprint = r.u64("codebook fingerprint");
    if (fingerprint != cb.fingerprint() || num_clusters != cb.num_clusters() || dim != cb.dim()) {
        throw Error(ErrorCode::kCodebookMismatch, r.what() + ": built against a different codebook");
    }
    if (dim == 0) throw Error(ErrorCode::kInvalidHeader, r.what() + ": D must be positive");

    const std::uint32_t count = r.u32("utterance count");
    std::vector<Utterance> utterances;
    utterances.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id = r.string("utterance id");
        const std::uint32_t frames = r.u32("T");
        r.require_payload(std::uint64_t{frames} * 4 * (1 + std::uint64_t{dim}), "utterance payload");
        std::vector<std::uint32_t> units(frames);
        for (auto& u : units) u = r.u32("units");
        std::vector<float> values(std::size_t{frames} * dim);
        for (auto& v : values) v = r.f32("features");
        utterances.emplace_back(UnitSequence(id, std::move(units), num_clusters),
                                FeatureMatrix(id, frames, dim, std::move(values)));
    }
    r.expect_end();
    return build_pool(std::move(utterances), cb, min_len, max_len);
}

}  // namespace unitsel
