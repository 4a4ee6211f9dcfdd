#include "unitsel/unit_tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "parallel.hpp"
#include "random.hpp"
#include "unitsel/error.hpp"

namespace unitsel {

namespace {

template <typename C>
double squared_distance_to(std::span<const float> frame, const C* centroid) noexcept {
    double acc = 0.0;
    for (std::size_t d = 0; d < frame.size(); ++d) {
        const double diff = static_cast<double>(frame[d]) - static_cast<double>(centroid[d]);
        acc += diff * diff;
    }
    return acc;
}

struct Assignment {
    std::vector<std::uint32_t> label;
    std::vector<double> dist;

    double mean() const {
        double sum = 0.0;
        for (double d : dist) sum += d;
        return sum / static_cast<double>(dist.size());
    }
};

void assign_all(std::span<const float> frames, std::size_t dim, const std::vector<double>& centroids,
                std::size_t k, std::size_t threads, Assignment& out) {
    const std::size_t n = frames.size() / dim;
    out.label.resize(n);
    out.dist.resize(n);
    detail::parallel_for(n, threads, [&](std::size_t i) {
        const auto frame = frames.subspan(i * dim, dim);
        std::uint32_t best = 0;
        double best_dist = squared_distance_to(frame, centroids.data());
        for (std::size_t c = 1; c < k; ++c) {
            const double d = squared_distance_to(frame, centroids.data() + c * dim);
            if (d < best_dist) {
                best_dist = d;
                best = static_cast<std::uint32_t>(c);
            }
        }
        out.label[i] = best;
        out.dist[i] = best_dist;
    });
}

std::vector<double> seed_plus_plus(std::span<const float> frames, std::size_t dim, std::size_t k,
                                   std::mt19937_64& rng) {
    const std::size_t n = frames.size() / dim;
    std::vector<double> centroids(k * dim);
    auto place = [&](std::size_t c, std::size_t frame_index) {
        const auto f = frames.subspan(frame_index * dim, dim);
        std::copy(f.begin(), f.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    };

    place(0, detail::uniform_index(rng, n));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = squared_distance_to(frames.subspan(i * dim, dim), centroids.data());
    }

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;

        std::size_t pick = n;
        if (total > 0.0) {
            const double target = detail::uniform_unit(rng) * total;
            double cum = 0.0;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                last_positive = i;
                cum += d2[i];
                if (cum > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = last_positive;
        } else {
            // Fewer distinct frames than clusters; duplicates are unavoidable.
            pick = detail::uniform_index(rng, n);
        }

        place(c, pick);
        const double* centroid = centroids.data() + c * dim;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance_to(frames.subspan(i * dim, dim), centroid));
        }
    }
    return centroids;
}

void check_finite_frames(std::span<const float> frames) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!std::isfinite(frames[i])) {
            throw Error(ErrorCode::kNonFinite,
                        "training frames: non-finite value at flat index " + std::to_string(i));
        }
    }
}

}  // namespace

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
    return squared_distance_to(a, b.data());
}

KMeansResult train_codebook(std::span<const float> frames, std::size_t dim, const KMeansConfig& cfg) {
    if (dim == 0 || frames.size() % dim != 0) {
        throw Error(ErrorCode::kInvalidArgument, "training frames are not a multiple of D");
    }
    if (cfg.k == 0 || cfg.max_iters == 0 || !(cfg.rel_tol >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "k and max_iters must be positive, rel_tol >= 0");
    }
    const std::size_t n = frames.size() / dim;
    if (n < cfg.k) {
        throw Error(ErrorCode::kInsufficientData,
                    "k = " + std::to_string(cfg.k) + " exceeds the " + std::to_string(n) +
                        " available training frames");
    }
    if (cfg.k > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::kInvalidArgument, "k does not fit in a 32-bit unit id");
    }
    check_finite_frames(frames);

    const std::size_t k = cfg.k;
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> centroids = seed_plus_plus(frames, dim, k, rng);

    Assignment assignment;
    assign_all(frames, dim, centroids, k, cfg.threads, assignment);

    std::vector<double> history{assignment.mean()};
    std::size_t iterations = 0;
    bool converged = false;

    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    std::vector<char> taken(n);
    while (iterations < cfg.max_iters) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = assignment.label[i];
            ++counts[c];
            const auto f = frames.subspan(i * dim, dim);
            double* s = sums.data() + c * dim;
            for (std::size_t d = 0; d < dim; ++d) s[d] += f[d];
        }

        std::fill(taken.begin(), taken.end(), 0);
        for (std::size_t c = 0; c < k; ++c) {
            double* centroid = centroids.data() + c * dim;
            if (counts[c] > 0) {
                const double inv = 1.0 / static_cast<double>(counts[c]);
                const double* s = sums.data() + c * dim;
                for (std::size_t d = 0; d < dim; ++d) centroid[d] = s[d] * inv;
                continue;
            }
            // Empty: move to the frame worst served by its current centroid.
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (far == n || assignment.dist[i] > assignment.dist[far]) far = i;
            }
            if (far == n) continue;
            taken[far] = 1;
            const auto f = frames.subspan(far * dim, dim);
            std::copy(f.begin(), f.end(), centroid);
        }

        const double previous = history.back();
        assign_all(frames, dim, centroids, k, cfg.threads, assignment);
        const double current = assignment.mean();
        history.push_back(current);
        ++iterations;

        if (previous <= 0.0 || (previous - current) / previous < cfg.rel_tol) {
            converged = true;
            break;
        }
    }

    std::vector<float> narrowed(centroids.size());
    std::transform(centroids.begin(), centroids.end(), narrowed.begin(),
                   [](double v) { return static_cast<float>(v); });
    return KMeansResult{Codebook(k, dim, std::move(narrowed)), std::move(history), iterations,
                        converged};
}

KMeansResult train_codebook(std::span<const FeatureMatrix> matrices, const KMeansConfig& cfg) {
    if (matrices.empty()) throw Error(ErrorCode::kEmptyInput, "no training matrices");
    const std::size_t dim = matrices.front().dim();
    std::size_t total = 0;
    for (const auto& m : matrices) {
        if (m.dim() != dim) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "matrix '" + m.utterance_id() + "' has D = " + std::to_string(m.dim()) +
                            ", expected " + std::to_string(dim));
        }
        total += m.values().size();
    }
    std::vector<float> frames;
    frames.reserve(total);
    for (const auto& m : matrices) frames.insert(frames.end(), m.values().begin(), m.values().end());
    return train_codebook(frames, dim, cfg);
}

std::uint32_t nearest_centroid(std::span<const float> frame, const Codebook& cb) {
    if (frame.size() != cb.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "frame has D = " + std::to_string(frame.size()) +
                                                       ", codebook D = " + std::to_string(cb.dim()));
    }
    const float* c = cb.values().data();
    std::uint32_t best = 0;
    double best_dist = squared_distance_to(frame, c);
    for (std::size_t k = 1; k < cb.num_clusters(); ++k) {
        const double d = squared_distance_to(frame, c + k * cb.dim());
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<std::uint32_t>(k);
        }
    }
    return best;
}

UnitSequence assign_units(const FeatureMatrix& m, const Codebook& cb, std::size_t threads) {
    if (m.dim() != cb.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "utterance '" + m.utterance_id() + "' has D = " + std::to_string(m.dim()) +
                        ", codebook D = " + std::to_string(cb.dim()));
    }
    std::vector<std::uint32_t> units(m.num_frames());
    detail::parallel_for(m.num_frames(), threads,
                         [&](std::size_t t) { units[t] = nearest_centroid(m.frame(t), cb); });
    return UnitSequence(m.utterance_id(), std::move(units),
                        static_cast<std::uint32_t>(cb.num_clusters()));
}

std::uint32_t nearest_nonempty_cluster(std::uint32_t unit, std::span<const std::uint32_t> occupancy,
                                       const Codebook& cb) {
    if (occupancy.size() != cb.num_clusters()) {
        throw Error(ErrorCode::kDimensionMismatch, "occupancy has " +
                                                       std::to_string(occupancy.size()) +
                                                       " clusters, codebook has " +
                                                       std::to_string(cb.num_clusters()));
    }
    if (unit >= cb.num_clusters()) {
        throw Error(ErrorCode::kUnitOutOfRange, "unit " + std::to_string(unit) +
                                                    " is not below K = " +
                                                    std::to_string(cb.num_clusters()));
    }
    if (occupancy[unit] > 0) return unit;

    const auto target = cb.centroid(unit);
    std::uint32_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t c = 0; c < occupancy.size(); ++c) {
        if (occupancy[c] == 0) continue;
        const double d = squared_distance_to(target, cb.centroid(c).data());
        if (!found || d < best_dist) {
            best_dist = d;
            best = static_cast<std::uint32_t>(c);
            found = true;
        }
    }
    if (!found) throw Error(ErrorCode::kEmptyInput, "every cluster is empty");
    return best;
}

std::vector<Utterance> load_utterances(std::span<const ManifestEntry> entries, const Codebook& cb,
                                       std::size_t threads) {
    std::vector<Utterance> out;
    out.reserve(entries.size());
    for (const auto& entry : entries) {
        FeatureMatrix features = read_features(entry.feature_path, entry.utterance_id);
        if (features.dim() != cb.dim()) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "utterance '" + entry.utterance_id + "' has D = " +
                            std::to_string(features.dim()) + ", codebook D = " +
                            std::to_string(cb.dim()));
        }
        if (entry.units_path) {
            UnitSequence units = read_units(*entry.units_path, entry.utterance_id);
            if (units.num_clusters() != cb.num_clusters()) {
                throw Error(ErrorCode::kCodebookMismatch,
                            "units for '" + entry.utterance_id + "' declare K = " +
                                std::to_string(units.num_clusters()) + ", codebook K = " +
                                std::to_string(cb.num_clusters()));
            }
            out.emplace_back(std::move(units), std::move(features));
        } else {
            UnitSequence units = assign_units(features, cb, threads);
            out.emplace_back(std::move(units), std::move(features));
        }
    }
    return out;
}

}  // namespace unitsel
