#pragma once

// Little-endian byte encoding shared by the on-disk formats.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unitsel/error.hpp"

namespace unitsel::detail {

class ByteWriter {
public:
    void magic(const char (&tag)[4]) {
        for (char c : tag) bytes_.push_back(static_cast<std::byte>(c));
    }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
    }

    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    void string(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        for (char c : s) bytes_.push_back(static_cast<std::byte>(c));
    }

    void reserve(std::size_t n) { bytes_.reserve(n); }
    std::vector<std::byte> take() && { return std::move(bytes_); }

private:
    std::vector<std::byte> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::byte> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    void expect_magic(const char (&tag)[4]) {
        need(4, "magic");
        if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
            throw Error(ErrorCode::kBadMagic, what_ + ": expected magic \"" + std::string(tag, 4) +
                                                  "\", found \"" + printable(4) + "\"");
        }
        pos_ += 4;
    }

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64(const char* field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::to_integer<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

    std::string string(const char* field) {
        const std::uint32_t n = u32(field);
        need(n, field);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    // Fails with kTruncated before any allocation when the declared payload
    // does not fit in the remaining bytes.
    void require_payload(std::uint64_t num_bytes, const char* field) const {
        if (num_bytes > remaining()) {
            throw Error(ErrorCode::kTruncated, what_ + ": " + field + " declares " +
                                                   std::to_string(num_bytes) + " bytes, only " +
                                                   std::to_string(remaining()) + " present");
        }
    }

    void expect_end() const {
        if (remaining() != 0) {
            throw Error(ErrorCode::kTrailingBytes,
                        what_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
        }
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    const std::string& what() const noexcept { return what_; }

private:
    void need(std::size_t n, const char* field) const {
        if (n > remaining()) {
            throw Error(ErrorCode::kTruncated, what_ + ": truncated while reading " + field);
        }
    }

    std::string printable(std::size_t n) const {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = std::to_integer<unsigned char>(bytes_[pos_ + i]);
            s += (c >= 0x20 && c < 0x7F) ? static_cast<char>(c) : '?';
        }
        return s;
    }

    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);

std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace unitsel::detail
