#include "unitsel/trace_json.hpp"

#include <string>

#include "binary_io.hpp"

namespace unitsel {

nlohmann::ordered_json trace_to_json(const SelectionResult& result, const UnitSequence& predicted,
                                     const ReferencePool& pool) {
    nlohmann::ordered_json doc;
    doc["utterance_id"] = result.features.utterance_id();
    doc["coverage"] = result.coverage();
    auto frames = nlohmann::ordered_json::array();
    for (std::size_t pos = 0; pos < result.trace.size(); ++pos) {
        nlohmann::ordered_json f;
        f["pos"] = pos;
        if (const auto* m = std::get_if<MatchedFrame>(&result.trace[pos])) {
            f["kind"] = "match";
            f["unit"] = predicted[pos];
            f["src_utt"] = pool.utterance(m->source.utterance).id();
            f["src_frame"] = m->source.frame;
            f["segment_id"] = m->segment_id;
        } else {
            const auto& s = std::get<SampledFrame>(result.trace[pos]);
            f["kind"] = "sample";
            f["unit"] = s.requested_unit;
            f["resolved_cluster"] = s.resolved_cluster;
            f["mode"] = to_string(s.mode);
            if (s.mode == SamplingMode::kRandom && !s.sources.empty()) {
                f["src_utt"] = pool.utterance(s.sources.front().utterance).id();
                f["src_frame"] = s.sources.front().frame;
            }
        }
        frames.push_back(std::move(f));
    }
    doc["frames"] = std::move(frames);
    return doc;
}

void write_trace(const SelectionResult& result, const UnitSequence& predicted,
                 const ReferencePool& pool, const std::filesystem::path& path) {
    const std::string text = trace_to_json(result, predicted, pool).dump() + "\n";
    detail::write_file_atomic(
        path, std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()));
}

}  // namespace unitsel
