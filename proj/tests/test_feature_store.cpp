#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "support/test_support.hpp"
#include "unitsel/error.hpp"
#include "unitsel/feature_store.hpp"

namespace unitsel {
namespace {

using testing::TempDir;

const std::filesystem::path kData = UNITSEL_TEST_DATA_DIR;

template <typename Fn>
ErrorCode error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::kIo;
}

std::vector<std::byte> bytes_of(std::initializer_list<int> values) {
    std::vector<std::byte> out;
    for (int v : values) out.push_back(static_cast<std::byte>(v));
    return out;
}

TEST(FeatureMatrix, RejectsEmptyShapes) {
    EXPECT_EQ(error_code_of([] { FeatureMatrix("u", 0, 4, {}); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(error_code_of([] { FeatureMatrix("u", 2, 0, {}); }), ErrorCode::kInvalidArgument);
    EXPECT_EQ(error_code_of([] { FeatureMatrix("u", 2, 2, {1, 2, 3}); }), ErrorCode::kLengthMismatch);
}

TEST(FeatureMatrix, RejectsNonFinite) {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    const float inf = std::numeric_limits<float>::infinity();
    EXPECT_EQ(error_code_of([&] { FeatureMatrix("u", 1, 2, {0.0f, nan}); }), ErrorCode::kNonFinite);
    EXPECT_EQ(error_code_of([&] { FeatureMatrix("u", 1, 2, {-inf, 0.0f}); }), ErrorCode::kNonFinite);
}

TEST(FeatureMatrix, EqualityIsBitwise) {
    const FeatureMatrix a("u", 1, 1, {0.0f});
    const FeatureMatrix b("u", 1, 1, {-0.0f});
    EXPECT_FALSE(a == b);
    EXPECT_TRUE(a == FeatureMatrix("u", 1, 1, {0.0f}));
}

TEST(FeatureStore, ZeroMatrixRoundTrips) {
    TempDir dir;
    const FeatureMatrix m("zeros", 3, 4, std::vector<float>(12, 0.0f));
    write_features(m, dir / "zeros.usfm");
    EXPECT_EQ(read_features(dir / "zeros.usfm"), m);
}

TEST(FeatureStore, GoldenFeatureBytes) {
    const FeatureMatrix m("golden_2x3", 2, 3, {1.0f, -2.5f, 0.5f, 3.25f, -0.125f, 100.0f});
    EXPECT_EQ(encode_features(m), testing::file_bytes(kData / "golden_2x3.usfm"));
    EXPECT_EQ(read_features(kData / "golden_2x3.usfm"), m);

    // Header spelled out: magic, version 1, T = 2, D = 3, then 1.0f = 0x3F800000.
    const auto bytes = encode_features(m);
    const auto head = std::vector<std::byte>(bytes.begin(), bytes.begin() + 20);
    EXPECT_EQ(head, bytes_of({'U', 'S', 'F', 'M', 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 0x00, 0x00, 0x80, 0x3F}));
}

TEST(FeatureStore, GoldenUnitAndCodebookBytes) {
    const UnitSequence u("golden_units", {0, 4, 2, 2}, 5);
    EXPECT_EQ(encode_units(u), testing::file_bytes(kData / "golden_units.usuq"));
    EXPECT_EQ(read_units(kData / "golden_units.usuq"), u);

    const Codebook cb(2, 2, {0.0f, 1.0f, -1.0f, 0.25f});
    EXPECT_EQ(encode_codebook(cb), testing::file_bytes(kData / "golden_2x2.uscb"));
    EXPECT_EQ(read_codebook(kData / "golden_2x2.uscb"), cb);
}

TEST(FeatureStore, BadMagic) {
    auto bytes = encode_features(FeatureMatrix("m", 1, 1, {1.0f}));
    for (int i = 0; i < 4; ++i) bytes[i] = std::byte{'X'};
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kBadMagic);
    // A units file is not a feature file.
    EXPECT_EQ(error_code_of([&] { decode_features(encode_units(UnitSequence("u", {1}, 2)), "u"); }),
              ErrorCode::kBadMagic);
}

TEST(FeatureStore, VersionMismatch) {
    auto bytes = encode_features(FeatureMatrix("m", 1, 1, {1.0f}));
    bytes[4] = std::byte{2};
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kVersionMismatch);
}

TEST(FeatureStore, TruncatedAndTrailingPayload) {
    const auto bytes = encode_features(FeatureMatrix("m", 2, 2, {1, 2, 3, 4}));
    auto shorter = bytes;
    shorter.pop_back();
    EXPECT_EQ(error_code_of([&] { decode_features(shorter, "m"); }), ErrorCode::kTruncated);
    auto header_only = std::vector<std::byte>(bytes.begin(), bytes.begin() + 10);
    EXPECT_EQ(error_code_of([&] { decode_features(header_only, "m"); }), ErrorCode::kTruncated);
    auto longer = bytes;
    longer.push_back(std::byte{0});
    EXPECT_EQ(error_code_of([&] { decode_features(longer, "m"); }), ErrorCode::kTrailingBytes);
}

TEST(FeatureStore, DeclaredSizeDisagreesWithPayload) {
    auto bytes = encode_features(FeatureMatrix("m", 2, 2, {1, 2, 3, 4}));
    bytes[8] = std::byte{3};  // T = 3 with a 2x2 payload
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kTruncated);
    bytes[8] = std::byte{1};  // T = 1 leaves 8 bytes over
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kTrailingBytes);
    bytes[8] = std::byte{0xFF};  // huge T must fail before allocating
    bytes[9] = std::byte{0xFF};
    bytes[10] = std::byte{0xFF};
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kTruncated);
}

TEST(FeatureStore, NonFinitePayloadRejectedOnRead) {
    auto bytes = encode_features(FeatureMatrix("m", 1, 1, {1.0f}));
    const auto nan = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    for (int i = 0; i < 4; ++i) bytes[16 + i] = static_cast<std::byte>((nan >> (8 * i)) & 0xFF);
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kNonFinite);
}

TEST(FeatureStore, ZeroDimensionHeader) {
    auto bytes = encode_features(FeatureMatrix("m", 1, 1, {1.0f}));
    bytes[12] = std::byte{0};
    EXPECT_EQ(error_code_of([&] { decode_features(bytes, "m"); }), ErrorCode::kInvalidHeader);
}

TEST(FeatureStore, RandomMatricesRoundTripBitExactly) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint32_t> bits;
    std::uniform_int_distribution<std::size_t> shape(1, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t t = shape(rng), d = shape(rng);
        std::vector<float> values(t * d);
        for (auto& v : values) {
            // Arbitrary finite bit patterns, including subnormals and -0.0.
            do {
                v = std::bit_cast<float>(bits(rng));
            } while (!std::isfinite(v));
        }
        const FeatureMatrix m("r", t, d, std::move(values));
        const auto encoded = encode_features(m);
        ASSERT_EQ(encoded.size(), 16 + 4 * t * d);
        ASSERT_EQ(decode_features(encoded, "r"), m) << "trial " << trial;
    }
}

TEST(UnitsStore, RoundTripAndRangeGuard) {
    TempDir dir;
    const UnitSequence u("u", {0, 1, 2}, 3);
    write_units(u, dir / "u.usuq");
    EXPECT_EQ(read_units(dir / "u.usuq"), u);

    // Hand-built file holding id 7 with K = 4.
    auto bytes = encode_units(UnitSequence("bad", {1, 2}, 8));
    bytes[12] = std::byte{4};
    bytes[20] = std::byte{7};
    EXPECT_EQ(error_code_of([&] { decode_units(bytes, "bad"); }), ErrorCode::kUnitOutOfRange);
}

TEST(UnitsStore, EmptySequenceAllowed) {
    const UnitSequence empty("e", {}, 4);
    EXPECT_EQ(decode_units(encode_units(empty), "e"), empty);
}

TEST(UnitsStore, ZeroClustersRejected) {
    auto bytes = encode_units(UnitSequence("u", {}, 1));
    bytes[12] = std::byte{0};
    EXPECT_EQ(error_code_of([&] { decode_units(bytes, "u"); }), ErrorCode::kInvalidHeader);
}

TEST(CodebookStore, LargeRandomCodebookRoundTrips) {
    TempDir dir;
    std::mt19937_64 rng(5);
    const Codebook cb = testing::random_codebook(rng, 2000, 64);
    write_codebook(cb, dir / "cb.uscb");
    const Codebook back = read_codebook(dir / "cb.uscb");
    EXPECT_EQ(back, cb);
    EXPECT_EQ(back.fingerprint(), cb.fingerprint());
}

TEST(CodebookStore, FingerprintTracksContent) {
    const Codebook a(2, 1, {0.0f, 1.0f});
    const Codebook b(2, 1, {0.0f, 2.0f});
    const Codebook c(1, 2, {0.0f, 1.0f});
    EXPECT_NE(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.fingerprint(), c.fingerprint());
    EXPECT_EQ(a.fingerprint(), Codebook(2, 1, {0.0f, 1.0f}).fingerprint());
}

TEST(Utterance, LengthsMustMatch) {
    EXPECT_EQ(error_code_of([] { Utterance(UnitSequence("u", {0, 1}, 2), FeatureMatrix("u", 3, 1, {0, 0, 0})); }),
              ErrorCode::kLengthMismatch);
}

TEST(FeatureStore, MissingFileIsIoError) {
    EXPECT_EQ(error_code_of([] { read_features("/nonexistent/x.usfm"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace unitsel
