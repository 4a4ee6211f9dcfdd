#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace unitsel {

struct ManifestEntry {
    std::string utterance_id;
    std::string speaker_id;
    // Absolute (or caller-relative) once loaded; relative paths in the file are
    // resolved against the manifest's directory.
    std::filesystem::path feature_path;
    std::optional<std::filesystem::path> units_path;
    std::optional<std::int64_t> duration_ms;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// JSON-lines dataset index: one object per line, utterance ids unique.
struct Manifest {
    std::vector<ManifestEntry> entries;

    // Distinct speaker ids in order of first appearance.
    std::vector<std::string> speakers() const;
    std::vector<ManifestEntry> for_speaker(const std::string& speaker_id) const;
};

// Blank lines are skipped. Errors report the 1-based line number.
Manifest load_manifest(const std::filesystem::path& path);

// Paths under the manifest's directory are written relative to it.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace unitsel
