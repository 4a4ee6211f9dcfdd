#include "unitsel/eval_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "parallel.hpp"
#include "unitsel/error.hpp"

namespace unitsel {

namespace {

double cosine(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        dot += static_cast<double>(a[d]) * b[d];
        na += static_cast<double>(a[d]) * a[d];
        nb += static_cast<double>(b[d]) * b[d];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

ReconReport reconstruction_eval(const Utterance& target, const ReferencePool& pool, const Codebook& cb,
                                const SelectionConfig& cfg) {
    const SelectionResult sel = select_frames(target.units(), pool, cb, cfg);
    const FeatureMatrix& truth = target.features();

    ReconReport report;
    report.utterance_id = target.id();
    report.coverage = sel.coverage();
    report.pool_frames = pool.total_frames();
    report.pool_seconds = static_cast<double>(pool.total_frames()) *
                          truth.frame_hop_ms() / 1000.0;

    double cos_sum = 0.0, sq_sum = 0.0;
    std::size_t sampled = 0, hits = 0;
    for (std::size_t t = 0; t < truth.num_frames(); ++t) {
        const auto got = sel.features.frame(t);
        const auto want = truth.frame(t);
        cos_sum += cosine(got, want);
        for (std::size_t d = 0; d < got.size(); ++d) {
            const double diff = static_cast<double>(got[d]) - want[d];
            sq_sum += diff * diff;
        }
        if (const auto* s = std::get_if<SampledFrame>(&sel.trace[t])) {
            ++sampled;
            if (s->resolved_cluster == s->requested_unit) ++hits;
        }
    }
    const double frames = static_cast<double>(truth.num_frames());
    report.mean_cosine = cos_sum / frames;
    report.mean_sq_err = sq_sum / (frames * static_cast<double>(truth.dim()));
    report.sampled_frames = sampled;
    report.cluster_hit_rate = sampled == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(sampled);
    return report;
}

DurationSpec parse_duration(std::string_view token, int frame_hop_ms) {
    if (frame_hop_ms <= 0) throw Error(ErrorCode::kInvalidArgument, "frame hop must be positive");
    std::size_t seconds_per_unit = 0;
    std::string_view number;
    if (token.size() > 3 && token.substr(token.size() - 3) == "min") {
        seconds_per_unit = 60;
        number = token.substr(0, token.size() - 3);
    } else if (token.size() > 1 && token.back() == 's') {
        seconds_per_unit = 1;
        number = token.substr(0, token.size() - 1);
    }
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (seconds_per_unit == 0 || ec != std::errc{} || end != number.data() + number.size() || value == 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duration '" + std::string(token) + "' must look like 30s or 3min");
    }
    const std::size_t ms = value * seconds_per_unit * 1000;
    return DurationSpec{std::string(token), ms / static_cast<std::size_t>(frame_hop_ms)};
}

std::vector<DurationSpec> parse_durations(std::string_view csv, int frame_hop_ms) {
    std::vector<DurationSpec> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = std::min(csv.find(',', pos), csv.size());
        out.push_back(parse_duration(csv.substr(pos, comma - pos), frame_hop_ms));
        pos = comma + 1;
    }
    return out;
}

TruncatedReferences truncate_references(std::span<const Utterance> refs, std::size_t frame_budget) {
    TruncatedReferences out;
    for (const auto& utt : refs) {
        if (out.frames >= frame_budget) break;
        out.utterances.push_back(utt);
        out.frames += utt.num_frames();
    }
    out.used_all_material = out.frames < frame_budget;
    return out;
}

SweepRow average_reports(std::string label, std::size_t frame_budget, std::vector<ReconReport> reports,
                         bool used_all_material) {
    std::sort(reports.begin(), reports.end(),
              [](const ReconReport& a, const ReconReport& b) { return a.utterance_id < b.utterance_id; });
    SweepRow row;
    row.duration_label = std::move(label);
    row.frame_budget = frame_budget;
    row.n_targets = reports.size();
    row.used_all_material = used_all_material;
    if (reports.empty()) return row;
    for (const auto& r : reports) {
        row.mean_coverage += r.coverage;
        row.mean_cosine += r.mean_cosine;
        row.mean_mse += r.mean_sq_err;
        row.mean_cluster_hit_rate += r.cluster_hit_rate;
        row.mean_pool_seconds += r.pool_seconds;
    }
    const double n = static_cast<double>(reports.size());
    row.mean_coverage /= n;
    row.mean_cosine /= n;
    row.mean_mse /= n;
    row.mean_cluster_hit_rate /= n;
    row.mean_pool_seconds /= n;
    return row;
}

std::vector<SweepRow> reference_duration_sweep(std::span<const SpeakerSplit> speakers,
                                               std::span<const DurationSpec> durations, const Codebook& cb,
                                               const SelectionConfig& cfg, std::size_t threads) {
    std::vector<SweepRow> rows;
    for (const auto& duration : durations) {
        std::vector<ReconReport> reports;
        bool used_all = false;
        for (const auto& speaker : speakers) {
            if (speaker.targets.empty()) continue;
            if (speaker.references.empty()) {
                throw Error(ErrorCode::kEmptyInput,
                            "speaker '" + speaker.speaker_id + "' has no reference utterances");
            }
            auto truncated = truncate_references(speaker.references, duration.frame_budget);
            used_all = used_all || truncated.used_all_material;
            const ReferencePool pool =
                build_pool(std::move(truncated.utterances), cb, cfg.min_len, cfg.max_len);

            std::vector<ReconReport> speaker_reports(speaker.targets.size());
            detail::parallel_for(speaker.targets.size(), threads, [&](std::size_t i) {
                speaker_reports[i] = reconstruction_eval(speaker.targets[i], pool, cb, cfg);
            });
            reports.insert(reports.end(), std::make_move_iterator(speaker_reports.begin()),
                           std::make_move_iterator(speaker_reports.end()));
        }
        rows.push_back(average_reports(duration.label, duration.frame_budget, std::move(reports), used_all));
    }
    return rows;
}

nlohmann::ordered_json sweep_to_json(std::span<const SweepRow> rows) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["duration_label"] = r.duration_label;
        j["n_targets"] = r.n_targets;
        j["mean_coverage"] = r.mean_coverage;
        j["mean_cosine"] = r.mean_cosine;
        j["mean_mse"] = r.mean_mse;
        j["mean_cluster_hit_rate"] = r.mean_cluster_hit_rate;
        j["mean_pool_seconds"] = r.mean_pool_seconds;
        j["used_all_material"] = r.used_all_material;
        out.push_back(std::move(j));
    }
    return out;
}

std::string sweep_to_table(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "duration" << std::right << std::setw(9) << "targets"
        << std::setw(11) << "coverage" << std::setw(11) << "cosine" << std::setw(12) << "mse"
        << std::setw(11) << "hit_rate" << std::setw(11) << "pool_s" << "\n";
    out << std::fixed;
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << (r.duration_label + (r.used_all_material ? "*" : ""))
            << std::right << std::setw(9) << r.n_targets << std::setprecision(4) << std::setw(11)
            << r.mean_coverage << std::setw(11) << r.mean_cosine << std::setprecision(6)
            << std::setw(12) << r.mean_mse << std::setprecision(4) << std::setw(11)
            << r.mean_cluster_hit_rate << std::setprecision(1) << std::setw(11) << r.mean_pool_seconds
            << "\n";
    }
    if (std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.used_all_material; })) {
        out << "* pool used all available reference material\n";
    }
    return out.str();
}

}  // namespace unitsel
