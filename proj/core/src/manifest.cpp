#include "unitsel/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "binary_io.hpp"
#include "unitsel/error.hpp"

namespace unitsel {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string required_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
        throw Error(ErrorCode::kMalformedRecord,
                    where + ": field '" + key + "' must be a non-empty string");
    }
    return it->get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relativize(const fs::path& base, const fs::path& p) {
    if (p.is_relative()) return p.generic_string();
    const fs::path rel = p.lexically_normal().lexically_relative(base.lexically_normal());
    if (rel.empty() || *rel.begin() == "..") return p.generic_string();
    return rel.generic_string();
}

}  // namespace

std::vector<std::string> Manifest::speakers() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& e : entries) {
        if (seen.insert(e.speaker_id).second) out.push_back(e.speaker_id);
    }
    return out;
}

std::vector<ManifestEntry> Manifest::for_speaker(const std::string& speaker_id) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries) {
        if (e.speaker_id == speaker_id) out.push_back(e);
    }
    return out;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open manifest '" + path.string() + "'");
    const fs::path base = fs::absolute(path).parent_path();

    Manifest manifest;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
        }
        if (!obj.is_object()) {
            throw Error(ErrorCode::kMalformedRecord, where + ": record is not a JSON object");
        }

        ManifestEntry entry;
        entry.utterance_id = required_string(obj, "utterance_id", where);
        entry.speaker_id = required_string(obj, "speaker_id", where);
        entry.feature_path = resolve(base, required_string(obj, "feature_path", where));
        if (auto it = obj.find("units_path"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) {
                throw Error(ErrorCode::kMalformedRecord, where + ": 'units_path' must be a string");
            }
            entry.units_path = resolve(base, it->get<std::string>());
        }
        if (auto it = obj.find("duration_ms"); it != obj.end() && !it->is_null()) {
            if (!it->is_number_integer()) {
                throw Error(ErrorCode::kMalformedRecord, where + ": 'duration_ms' must be an integer");
            }
            entry.duration_ms = it->get<std::int64_t>();
        }

        if (!ids.insert(entry.utterance_id).second) {
            throw Error(ErrorCode::kDuplicateId,
                        where + ": duplicate utterance_id '" + entry.utterance_id + "'");
        }
        std::ifstream probe(entry.feature_path, std::ios::binary);
        if (!probe) {
            throw Error(ErrorCode::kUnresolvablePath,
                        where + ": feature_path '" + entry.feature_path.string() + "' is not readable");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
    const fs::path base = fs::absolute(path).parent_path();
    std::ostringstream out;
    for (const auto& e : manifest.entries) {
        // ordered_json keeps the field order stable for diffs.
        nlohmann::ordered_json obj;
        obj["utterance_id"] = e.utterance_id;
        obj["speaker_id"] = e.speaker_id;
        obj["feature_path"] = relativize(base, e.feature_path);
        if (e.units_path) obj["units_path"] = relativize(base, *e.units_path);
        if (e.duration_ms) obj["duration_ms"] = *e.duration_ms;
        out << obj.dump() << '\n';
    }
    const std::string text = out.str();
    detail::write_file_atomic(
        path, std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()));
}

}  // namespace unitsel
