#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "support/test_support.hpp"
#include "unitsel/error.hpp"
#include "unitsel/unit_tokenizer.hpp"

namespace unitsel {
namespace {

std::vector<float> random_frames(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> v(n * dim);
    for (auto& x : v) x = normal(rng);
    return v;
}

double oracle_objective(std::span<const float> frames, std::size_t dim, const Codebook& cb) {
    double total = 0.0;
    const std::size_t n = frames.size() / dim;
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = frames.subspan(i * dim, dim);
        const auto c = cb.centroid(testing::oracle_nearest(f, cb));
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) acc += (double(f[d]) - c[d]) * (double(f[d]) - c[d]);
        total += acc;
    }
    return total / static_cast<double>(n);
}

TEST(TrainCodebook, SingleClusterIsTheMean) {
    std::mt19937_64 rng(1);
    const std::size_t n = 257, dim = 5;
    const auto frames = random_frames(rng, n, dim);
    KMeansConfig cfg;
    cfg.k = 1;
    const auto result = train_codebook(frames, dim, cfg);
    ASSERT_EQ(result.codebook.num_clusters(), 1u);
    for (std::size_t d = 0; d < dim; ++d) {
        long double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += frames[i * dim + d];
        EXPECT_NEAR(result.codebook.centroid(0)[d], static_cast<double>(sum / n), 1e-6);
    }
}

TEST(TrainCodebook, AllDistinctFramesBecomeTheirOwnCentroids) {
    std::mt19937_64 rng(2);
    const std::size_t n = 12, dim = 3;
    const auto frames = random_frames(rng, n, dim);
    KMeansConfig cfg;
    cfg.k = n;
    cfg.seed = 9;
    const auto result = train_codebook(frames, dim, cfg);
    EXPECT_EQ(result.objective.back(), 0.0);

    std::set<std::vector<float>> want, got;
    for (std::size_t i = 0; i < n; ++i) want.insert({frames.begin() + i * dim, frames.begin() + (i + 1) * dim});
    for (std::size_t c = 0; c < n; ++c) {
        const auto row = result.codebook.centroid(c);
        got.insert({row.begin(), row.end()});
    }
    EXPECT_EQ(got, want);
}

TEST(TrainCodebook, ObjectiveNonIncreasingAndAssignmentMatchesOracle) {
    std::mt19937_64 rng(3);
    const std::size_t n = 10000, dim = 8;
    const auto frames = random_frames(rng, n, dim);
    KMeansConfig cfg;
    cfg.k = 16;
    cfg.seed = 42;
    cfg.rel_tol = 0.0;
    cfg.max_iters = 60;
    const auto result = train_codebook(frames, dim, cfg);
    ASSERT_GE(result.objective.size(), 2u);
    for (std::size_t i = 1; i < result.objective.size(); ++i) {
        EXPECT_LE(result.objective[i], result.objective[i - 1]) << "iteration " << i;
    }
    EXPECT_LE(result.iterations, cfg.max_iters);

    const FeatureMatrix all("all", n, dim, frames);
    const auto units = assign_units(all, result.codebook);
    for (std::size_t i = 0; i < n; ++i) {
        ASSERT_EQ(units[i], testing::oracle_nearest(all.frame(i), result.codebook)) << "frame " << i;
    }
    // The float codebook's objective stays close to the tracked one.
    EXPECT_NEAR(oracle_objective(frames, dim, result.codebook), result.objective.back(), 1e-4);
}

TEST(TrainCodebook, SameSeedBitIdenticalRegardlessOfThreads) {
    std::mt19937_64 rng(4);
    const auto frames = random_frames(rng, 3000, 6);
    KMeansConfig cfg;
    cfg.k = 24;
    cfg.seed = 7;
    const auto a = train_codebook(frames, 6, cfg);
    cfg.threads = 4;
    const auto b = train_codebook(frames, 6, cfg);
    EXPECT_EQ(a.codebook, b.codebook);
    EXPECT_EQ(a.objective, b.objective);
    cfg.seed = 8;
    EXPECT_FALSE(train_codebook(frames, 6, cfg).codebook == a.codebook);
}

TEST(TrainCodebook, StopsOnRelativeTolerance) {
    std::mt19937_64 rng(5);
    const auto frames = random_frames(rng, 2000, 4);
    KMeansConfig cfg;
    cfg.k = 8;
    cfg.rel_tol = 1e-2;
    const auto result = train_codebook(frames, 4, cfg);
    ASSERT_TRUE(result.converged);
    const auto& j = result.objective;
    EXPECT_LT((j[j.size() - 2] - j.back()) / j[j.size() - 2], 1e-2);
    for (std::size_t i = 1; i + 1 < j.size(); ++i) EXPECT_GE((j[i - 1] - j[i]) / j[i - 1], 1e-2);
}

TEST(TrainCodebook, DuplicateHeavyDataSurvivesEmptyClusters) {
    // Three distinct points, five clusters: seeding must duplicate and Lloyd
    // iterations hit empty clusters.
    std::vector<float> frames;
    for (int i = 0; i < 30; ++i) frames.push_back(static_cast<float>(i % 3));
    KMeansConfig cfg;
    cfg.k = 5;
    cfg.seed = 1;
    const auto result = train_codebook(frames, 1, cfg);
    for (std::size_t i = 1; i < result.objective.size(); ++i) {
        EXPECT_LE(result.objective[i], result.objective[i - 1]);
    }
    EXPECT_EQ(result.objective.back(), 0.0);
}

TEST(TrainCodebook, DistinctCentroidsWhenDataAllows) {
    std::mt19937_64 rng(6);
    const auto frames = random_frames(rng, 500, 3);
    KMeansConfig cfg;
    cfg.k = 40;
    const auto cb = train_codebook(frames, 3, cfg).codebook;
    std::set<std::vector<float>> rows;
    for (std::size_t c = 0; c < cb.num_clusters(); ++c) rows.insert({cb.centroid(c).begin(), cb.centroid(c).end()});
    EXPECT_EQ(rows.size(), cb.num_clusters());
}

TEST(TrainCodebook, Errors) {
    const std::vector<float> frames{0, 1, 2};
    KMeansConfig cfg;
    cfg.k = 4;
    try {
        train_codebook(frames, 1, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
        EXPECT_NE(std::string(e.what()).find('4'), std::string::npos);
        EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
    }
    cfg.k = 1;
    const std::vector<float> bad{0, std::numeric_limits<float>::infinity()};
    EXPECT_THROW(train_codebook(bad, 1, cfg), Error);
    EXPECT_THROW(train_codebook(frames, 2, cfg), Error);
}

TEST(AssignUnits, ExactCentroidAndTieBreak) {
    // Centroid 2 at (1, 0), centroid 5 at (-1, 0), the rest far away.
    std::vector<float> values(8 * 2);
    for (std::size_t c = 0; c < 8; ++c) values[c * 2] = 10.0f + static_cast<float>(c);
    values[2 * 2] = 1.0f;
    values[5 * 2] = -1.0f;
    const Codebook cb(8, 2, values);

    const FeatureMatrix on_three("m", 1, 2, {13.0f, 0.0f});
    EXPECT_EQ(assign_units(on_three, cb)[0], 3u);

    const FeatureMatrix between("m", 1, 2, {0.0f, 0.0f});
    EXPECT_EQ(assign_units(between, cb)[0], 2u);
}

TEST(AssignUnits, MatchesBruteForceOnRandomFrames) {
    std::mt19937_64 rng(7);
    const Codebook cb = testing::random_codebook(rng, 64, 12);
    const FeatureMatrix m = testing::random_features(rng, "r", 500, 12);
    const UnitSequence units = assign_units(m, cb, 3);
    ASSERT_EQ(units.size(), 500u);
    EXPECT_EQ(units.num_clusters(), 64u);
    for (std::size_t t = 0; t < 500; ++t) EXPECT_EQ(units[t], testing::oracle_nearest(m.frame(t), cb));
}

TEST(AssignUnits, PermutationEquivariant) {
    std::mt19937_64 rng(8);
    const Codebook cb = testing::random_codebook(rng, 32, 4);
    const FeatureMatrix m = testing::random_features(rng, "r", 200, 4);
    std::vector<std::size_t> perm(200);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<float> permuted;
    for (std::size_t i : perm) permuted.insert(permuted.end(), m.frame(i).begin(), m.frame(i).end());
    const auto a = assign_units(m, cb);
    const auto b = assign_units(FeatureMatrix("p", 200, 4, permuted), cb);
    for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(AssignUnits, AssignedUnitIsNoFartherThanAnyOther) {
    std::mt19937_64 rng(9);
    // Coarse integer grid makes exact ties common.
    std::uniform_int_distribution<int> grid(-2, 2);
    std::vector<float> cvals(20 * 2), fvals(300 * 2);
    for (auto& v : cvals) v = static_cast<float>(grid(rng));
    for (auto& v : fvals) v = static_cast<float>(grid(rng)) * 0.5f;
    const Codebook cb(20, 2, cvals);
    const FeatureMatrix m("g", 300, 2, fvals);
    const auto units = assign_units(m, cb);
    for (std::size_t t = 0; t < 300; ++t) {
        const double du = squared_distance(m.frame(t), cb.centroid(units[t]));
        for (std::uint32_t v = 0; v < 20; ++v) {
            const double dv = squared_distance(m.frame(t), cb.centroid(v));
            ASSERT_LE(du, dv);
            if (du == dv) ASSERT_GE(v, units[t]);
        }
    }
}

TEST(AssignUnits, DimensionMismatch) {
    const Codebook cb(2, 3, std::vector<float>(6, 0.0f));
    EXPECT_THROW(assign_units(FeatureMatrix("m", 1, 2, {0, 0}), cb), Error);
}

TEST(NearestNonempty, Examples) {
    const Codebook cb = testing::line_codebook(12, 2);
    std::vector<std::uint32_t> occupancy(12, 0);
    occupancy[4] = 1;
    occupancy[9] = 3;
    EXPECT_EQ(nearest_nonempty_cluster(4, occupancy, cb), 4u);
    occupancy[4] = 0;
    EXPECT_EQ(nearest_nonempty_cluster(4, occupancy, cb), 9u);
    // Equidistant: centroids 2 and 6 both sit 2 away from 4.
    occupancy.assign(12, 0);
    occupancy[2] = 1;
    occupancy[6] = 1;
    EXPECT_EQ(nearest_nonempty_cluster(4, occupancy, cb), 2u);
}

TEST(NearestNonempty, AllEmptyAndOutOfRange) {
    const Codebook cb = testing::line_codebook(3, 1);
    const std::vector<std::uint32_t> empty(3, 0);
    EXPECT_THROW(nearest_nonempty_cluster(0, empty, cb), Error);
    const std::vector<std::uint32_t> some{1, 0, 0};
    EXPECT_THROW(nearest_nonempty_cluster(3, some, cb), Error);
}

TEST(NearestNonempty, MatchesOracleOnRandomOccupancy) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const Codebook cb = testing::random_codebook(rng, 100, 6);
        std::vector<std::uint32_t> occupancy(100);
        std::bernoulli_distribution nonempty(0.1);
        for (auto& o : occupancy) o = nonempty(rng) ? 1 : 0;
        occupancy[trial] = 1;
        for (std::uint32_t u = 0; u < 100; ++u) {
            ASSERT_EQ(nearest_nonempty_cluster(u, occupancy, cb),
                      testing::oracle_nearest_nonempty(u, occupancy, cb));
        }
    }
}

}  // namespace
}  // namespace unitsel
