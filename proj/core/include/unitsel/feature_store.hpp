#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace unitsel {

inline constexpr int kDefaultFrameHopMs = 20;

// On-disk formats. Every integer and float is little-endian; payloads are
// row-major. Header = 4-byte magic, u32 version, two u32 dimensions.
inline constexpr char kFeatureMagic[4] = {'U', 'S', 'F', 'M'};
inline constexpr char kUnitsMagic[4] = {'U', 'S', 'U', 'Q'};
inline constexpr char kCodebookMagic[4] = {'U', 'S', 'C', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;

// T x D frame-level features of one utterance. Storage is immutable and shared
// between copies, so passing matrices around by value is cheap.
class FeatureMatrix {
public:
    FeatureMatrix(std::string utterance_id, std::size_t num_frames, std::size_t dim,
                  std::vector<float> values, int frame_hop_ms = kDefaultFrameHopMs);

    const std::string& utterance_id() const noexcept { return utterance_id_; }
    std::size_t num_frames() const noexcept { return num_frames_; }
    std::size_t dim() const noexcept { return dim_; }
    int frame_hop_ms() const noexcept { return frame_hop_ms_; }

    std::span<const float> frame(std::size_t t) const;
    std::span<const float> values() const noexcept { return *values_; }

    // Same frames under a different id; shares storage.
    FeatureMatrix renamed(std::string utterance_id) const;

    // Bitwise comparison of values (so -0.0f != 0.0f), plus id, shape and hop.
    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b);

private:
    std::string utterance_id_;
    std::size_t num_frames_;
    std::size_t dim_;
    int frame_hop_ms_;
    std::shared_ptr<const std::vector<float>> values_;
};

// Discrete unit ids in [0, K) for one utterance. May be empty.
class UnitSequence {
public:
    UnitSequence(std::string utterance_id, std::vector<std::uint32_t> units,
                 std::uint32_t num_clusters);

    const std::string& utterance_id() const noexcept { return utterance_id_; }
    std::span<const std::uint32_t> units() const noexcept { return units_; }
    std::size_t size() const noexcept { return units_.size(); }
    std::uint32_t operator[](std::size_t t) const { return units_[t]; }
    std::uint32_t num_clusters() const noexcept { return num_clusters_; }

    UnitSequence renamed(std::string utterance_id) const;

    friend bool operator==(const UnitSequence&, const UnitSequence&) = default;

private:
    std::string utterance_id_;
    std::vector<std::uint32_t> units_;
    std::uint32_t num_clusters_;
};

// K x D k-means centroids.
class Codebook {
public:
    Codebook(std::size_t num_clusters, std::size_t dim, std::vector<float> centroids);

    std::size_t num_clusters() const noexcept { return num_clusters_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const float> centroid(std::size_t k) const;
    std::span<const float> values() const noexcept { return centroids_; }

    // FNV-1a over the serialized form; binds pools and unit files to the
    // codebook that produced them.
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    friend bool operator==(const Codebook& a, const Codebook& b);

private:
    std::size_t num_clusters_;
    std::size_t dim_;
    std::vector<float> centroids_;
    std::uint64_t fingerprint_;
};

// A length-matched (units, features) pair for one utterance.
class Utterance {
public:
    Utterance(UnitSequence units, FeatureMatrix features);

    const std::string& id() const noexcept { return features_.utterance_id(); }
    const UnitSequence& units() const noexcept { return units_; }
    const FeatureMatrix& features() const noexcept { return features_; }
    std::size_t num_frames() const noexcept { return units_.size(); }

private:
    UnitSequence units_;
    FeatureMatrix features_;
};

void write_features(const FeatureMatrix& m, const std::filesystem::path& path);
// The utterance id defaults to the file stem; the format does not store it.
FeatureMatrix read_features(const std::filesystem::path& path, std::string utterance_id = {});

void write_units(const UnitSequence& u, const std::filesystem::path& path);
UnitSequence read_units(const std::filesystem::path& path, std::string utterance_id = {});

void write_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook read_codebook(const std::filesystem::path& path);

// In-memory encoders/decoders behind the file functions.
std::vector<std::byte> encode_features(const FeatureMatrix& m);
FeatureMatrix decode_features(std::span<const std::byte> bytes, std::string utterance_id);
std::vector<std::byte> encode_units(const UnitSequence& u);
UnitSequence decode_units(std::span<const std::byte> bytes, std::string utterance_id);
std::vector<std::byte> encode_codebook(const Codebook& cb);
Codebook decode_codebook(std::span<const std::byte> bytes);

}  // namespace unitsel
