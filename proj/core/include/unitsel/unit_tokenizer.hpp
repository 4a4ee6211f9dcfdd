#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "unitsel/feature_store.hpp"
#include "unitsel/manifest.hpp"

namespace unitsel {

inline constexpr std::size_t kDefaultNumClusters = 2000;

struct KMeansConfig {
    std::size_t k = kDefaultNumClusters;
    std::size_t max_iters = 100;
    // Stop once (J_prev - J) / J_prev falls below this.
    double rel_tol = 1e-4;
    std::uint64_t seed = 0;
    // Workers for the assignment step; 0 = hardware concurrency. The result
    // does not depend on this value.
    std::size_t threads = 1;
};

struct KMeansResult {
    Codebook codebook;
    // objective[0] is the k-means++ seeding; objective[i] follows the i-th
    // Lloyd update. Mean squared Euclidean distance to the nearest centroid.
    std::vector<double> objective;
    std::size_t iterations = 0;
    bool converged = false;
};

// Full-batch Lloyd's algorithm with k-means++ seeding. `frames` is row-major
// N x dim. Empty clusters are reseeded to the frame farthest from its
// centroid. Bit-identical output for identical input and seed.
KMeansResult train_codebook(std::span<const float> frames, std::size_t dim,
                            const KMeansConfig& cfg);
KMeansResult train_codebook(std::span<const FeatureMatrix> matrices, const KMeansConfig& cfg);

// Squared Euclidean distance accumulated in double.
double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;

// Index of the nearest centroid; ties go to the lower index.
std::uint32_t nearest_centroid(std::span<const float> frame, const Codebook& cb);

// z = tokenize(Z): one unit per frame.
UnitSequence assign_units(const FeatureMatrix& m, const Codebook& cb, std::size_t threads = 1);

// The nonempty cluster whose centroid is nearest to centroid[unit]; `unit`
// itself when it is nonempty. Ties go to the lower index.
std::uint32_t nearest_nonempty_cluster(std::uint32_t unit, std::span<const std::uint32_t> occupancy,
                                       const Codebook& cb);

// Loads features for each entry and pairs them with units: read from
// units_path when present (K must match the codebook), else assigned.
std::vector<Utterance> load_utterances(std::span<const ManifestEntry> entries, const Codebook& cb,
                                       std::size_t threads = 1);

}  // namespace unitsel
