#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "unitsel/frame_selection.hpp"
#include "unitsel/reference_pool.hpp"

namespace unitsel {

// {utterance_id, coverage, frames: [{pos, kind, unit, ...}]}. Source
// utterances are named by id; "match" frames carry src_utt, src_frame and
// segment_id; "sample" frames carry resolved_cluster and mode, plus src_utt
// and src_frame in random mode.
nlohmann::ordered_json trace_to_json(const SelectionResult& result, const UnitSequence& predicted,
                                     const ReferencePool& pool);

void write_trace(const SelectionResult& result, const UnitSequence& predicted,
                 const ReferencePool& pool, const std::filesystem::path& path);

}  // namespace unitsel
