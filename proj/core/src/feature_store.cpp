#include "unitsel/feature_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "unitsel/error.hpp"

namespace unitsel {

namespace {

void check_finite(std::span<const float> values, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::kNonFinite,
                        what + ": non-finite value at flat index " + std::to_string(i));
        }
    }
}

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

constexpr std::uint64_t kMaxU32 = 0xFFFFFFFFULL;

std::uint32_t checked_u32(std::size_t v, const char* field) {
    if (v > kMaxU32) {
        throw Error(ErrorCode::kInvalidArgument, std::string(field) + " does not fit in u32");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(std::string utterance_id, std::size_t num_frames, std::size_t dim,
                             std::vector<float> values, int frame_hop_ms)
    : utterance_id_(std::move(utterance_id)),
      num_frames_(num_frames),
      dim_(dim),
      frame_hop_ms_(frame_hop_ms) {
    if (num_frames == 0 || dim == 0) {
        throw Error(ErrorCode::kInvalidArgument, "feature matrix '" + utterance_id_ +
                                                     "' needs T >= 1 and D >= 1");
    }
    if (frame_hop_ms <= 0) {
        throw Error(ErrorCode::kInvalidArgument, "frame hop must be positive");
    }
    if (values.size() != num_frames * dim) {
        throw Error(ErrorCode::kLengthMismatch,
                    "feature matrix '" + utterance_id_ + "': " + std::to_string(values.size()) +
                        " values for " + std::to_string(num_frames) + "x" + std::to_string(dim));
    }
    check_finite(values, "feature matrix '" + utterance_id_ + "'");
    values_ = std::make_shared<const std::vector<float>>(std::move(values));
}

std::span<const float> FeatureMatrix::frame(std::size_t t) const {
    return std::span<const float>(*values_).subspan(t * dim_, dim_);
}

FeatureMatrix FeatureMatrix::renamed(std::string utterance_id) const {
    FeatureMatrix copy = *this;
    copy.utterance_id_ = std::move(utterance_id);
    return copy;
}

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.utterance_id_ == b.utterance_id_ && a.num_frames_ == b.num_frames_ &&
           a.dim_ == b.dim_ && a.frame_hop_ms_ == b.frame_hop_ms_ &&
           bitwise_equal(*a.values_, *b.values_);
}

// ---------------------------------------------------------------------------
// UnitSequence

UnitSequence::UnitSequence(std::string utterance_id, std::vector<std::uint32_t> units,
                           std::uint32_t num_clusters)
    : utterance_id_(std::move(utterance_id)), units_(std::move(units)), num_clusters_(num_clusters) {
    if (num_clusters_ == 0) {
        throw Error(ErrorCode::kInvalidArgument, "unit sequence '" + utterance_id_ + "' has K = 0");
    }
    for (std::size_t t = 0; t < units_.size(); ++t) {
        if (units_[t] >= num_clusters_) {
            throw Error(ErrorCode::kUnitOutOfRange,
                        "unit sequence '" + utterance_id_ + "': unit " + std::to_string(units_[t]) +
                            " at position " + std::to_string(t) + " is not below K = " +
                            std::to_string(num_clusters_));
        }
    }
}

UnitSequence UnitSequence::renamed(std::string utterance_id) const {
    UnitSequence copy = *this;
    copy.utterance_id_ = std::move(utterance_id);
    return copy;
}

// ---------------------------------------------------------------------------
// Codebook

Codebook::Codebook(std::size_t num_clusters, std::size_t dim, std::vector<float> centroids)
    : num_clusters_(num_clusters), dim_(dim), centroids_(std::move(centroids)) {
    if (num_clusters_ == 0 || dim_ == 0) {
        throw Error(ErrorCode::kInvalidArgument, "codebook needs K >= 1 and D >= 1");
    }
    if (centroids_.size() != num_clusters_ * dim_) {
        throw Error(ErrorCode::kLengthMismatch,
                    "codebook: " + std::to_string(centroids_.size()) + " values for " +
                        std::to_string(num_clusters_) + "x" + std::to_string(dim_));
    }
    check_finite(centroids_, "codebook");
    const auto bytes = encode_codebook(*this);
    fingerprint_ = detail::fnv1a64(bytes);
}

std::span<const float> Codebook::centroid(std::size_t k) const {
    return std::span<const float>(centroids_).subspan(k * dim_, dim_);
}

bool operator==(const Codebook& a, const Codebook& b) {
    return a.num_clusters_ == b.num_clusters_ && a.dim_ == b.dim_ &&
           bitwise_equal(a.centroids_, b.centroids_);
}

// ---------------------------------------------------------------------------
// Utterance

Utterance::Utterance(UnitSequence units, FeatureMatrix features)
    : units_(std::move(units)), features_(std::move(features)) {
    if (units_.size() != features_.num_frames()) {
        throw Error(ErrorCode::kLengthMismatch,
                    "utterance '" + features_.utterance_id() + "': " +
                        std::to_string(units_.size()) + " units vs " +
                        std::to_string(features_.num_frames()) + " feature frames");
    }
}

// ---------------------------------------------------------------------------
// Encoding

std::vector<std::byte> encode_features(const FeatureMatrix& m) {
    detail::ByteWriter w;
    w.reserve(16 + m.values().size() * 4);
    w.magic(kFeatureMagic);
    w.u32(kFormatVersion);
    w.u32(checked_u32(m.num_frames(), "T"));
    w.u32(checked_u32(m.dim(), "D"));
    for (float v : m.values()) w.f32(v);
    return std::move(w).take();
}

FeatureMatrix decode_features(std::span<const std::byte> bytes, std::string utterance_id) {
    detail::ByteReader r(bytes, "feature file '" + utterance_id + "'");
    r.expect_magic(kFeatureMagic);
    const std::uint32_t version = r.u32("version");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    r.what() + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t num_frames = r.u32("T");
    const std::uint32_t dim = r.u32("D");
    if (num_frames == 0 || dim == 0) {
        throw Error(ErrorCode::kInvalidHeader, r.what() + ": T and D must be positive");
    }
    const std::uint64_t count = std::uint64_t{num_frames} * dim;
    r.require_payload(count * 4, "T*D payload");
    std::vector<float> values(count);
    for (auto& v : values) v = r.f32("payload");
    r.expect_end();
    check_finite(values, r.what());
    return FeatureMatrix(std::move(utterance_id), num_frames, dim, std::move(values));
}

std::vector<std::byte> encode_units(const UnitSequence& u) {
    detail::ByteWriter w;
    w.reserve(16 + u.size() * 4);
    w.magic(kUnitsMagic);
    w.u32(kFormatVersion);
    w.u32(checked_u32(u.size(), "T"));
    w.u32(u.num_clusters());
    for (std::uint32_t id : u.units()) w.u32(id);
    return std::move(w).take();
}

UnitSequence decode_units(std::span<const std::byte> bytes, std::string utterance_id) {
    detail::ByteReader r(bytes, "units file '" + utterance_id + "'");
    r.expect_magic(kUnitsMagic);
    const std::uint32_t version = r.u32("version");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    r.what() + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t length = r.u32("T");
    const std::uint32_t num_clusters = r.u32("K");
    if (num_clusters == 0) {
        throw Error(ErrorCode::kInvalidHeader, r.what() + ": K must be positive");
    }
    r.require_payload(std::uint64_t{length} * 4, "T payload");
    std::vector<std::uint32_t> units(length);
    for (auto& id : units) id = r.u32("payload");
    r.expect_end();
    return UnitSequence(std::move(utterance_id), std::move(units), num_clusters);
}

std::vector<std::byte> encode_codebook(const Codebook& cb) {
    detail::ByteWriter w;
    w.reserve(16 + cb.values().size() * 4);
    w.magic(kCodebookMagic);
    w.u32(kFormatVersion);
    w.u32(checked_u32(cb.num_clusters(), "K"));
    w.u32(checked_u32(cb.dim(), "D"));
    for (float v : cb.values()) w.f32(v);
    return std::move(w).take();
}

Codebook decode_codebook(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes, "codebook file");
    r.expect_magic(kCodebookMagic);
    const std::uint32_t version = r.u32("version");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    r.what() + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t num_clusters = r.u32("K");
    const std::uint32_t dim = r.u32("D");
    if (num_clusters == 0 || dim == 0) {
        throw Error(ErrorCode::kInvalidHeader, r.what() + ": K and D must be positive");
    }
    const std::uint64_t count = std::uint64_t{num_clusters} * dim;
    r.require_payload(count * 4, "K*D payload");
    std::vector<float> values(count);
    for (auto& v : values) v = r.f32("payload");
    r.expect_end();
    check_finite(values, r.what());
    return Codebook(num_clusters, dim, std::move(values));
}

// ---------------------------------------------------------------------------
// Files

void write_features(const FeatureMatrix& m, const std::filesystem::path& path) {
    detail::write_file_atomic(path, encode_features(m));
}

FeatureMatrix read_features(const std::filesystem::path& path, std::string utterance_id) {
    if (utterance_id.empty()) utterance_id = path.stem().string();
    return decode_features(detail::read_file_bytes(path), std::move(utterance_id));
}

void write_units(const UnitSequence& u, const std::filesystem::path& path) {
    detail::write_file_atomic(path, encode_units(u));
}

UnitSequence read_units(const std::filesystem::path& path, std::string utterance_id) {
    if (utterance_id.empty()) utterance_id = path.stem().string();
    return decode_units(detail::read_file_bytes(path), std::move(utterance_id));
}

void write_codebook(const Codebook& cb, const std::filesystem::path& path) {
    detail::write_file_atomic(path, encode_codebook(cb));
}

Codebook read_codebook(const std::filesystem::path& path) {
    return decode_codebook(detail::read_file_bytes(path));
}

namespace detail {

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw Error(ErrorCode::kIo, "failed reading '" + path.string() + "'");
    }
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::kIo, "cannot rename onto '" + path.string() + "'");
    }
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (std::byte b : bytes) {
        h ^= std::to_integer<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

}  // namespace unitsel
