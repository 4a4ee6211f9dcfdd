#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "unitsel/error.hpp"
#include "unitsel/eval_harness.hpp"
#include "unitsel/feature_store.hpp"
#include "unitsel/frame_selection.hpp"
#include "unitsel/manifest.hpp"
#include "unitsel/reference_pool.hpp"
#include "unitsel/synthetic_corpus.hpp"
#include "unitsel/trace_json.hpp"
#include "unitsel/unit_tokenizer.hpp"

namespace unitsel::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string log_level = "info";
};

// Tracks files written by a command and deletes them unless commit() ran.
class OutputSet {
public:
    OutputSet() = default;
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    ~OutputSet() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    const fs::path& add(fs::path p) {
        paths_.push_back(std::move(p));
        return paths_.back();
    }

    void commit() { committed_ = true; }

private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
    }
}

std::string file_safe(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        if (c == '/' || c == '\\' || c == ':') c = '_';
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::kIo, "cannot create directory '" + dir.string() + "'");
    }
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) ensure_dir(file.parent_path());
}

std::string resolve_speaker(const Manifest& manifest, const std::string& requested) {
    const auto speakers = manifest.speakers();
    if (!requested.empty()) {
        if (std::find(speakers.begin(), speakers.end(), requested) == speakers.end()) {
            throw Error(ErrorCode::kInvalidArgument, "speaker '" + requested + "' not in manifest");
        }
        return requested;
    }
    if (speakers.size() == 1) return speakers.front();
    if (speakers.empty()) throw Error(ErrorCode::kEmptyInput, "manifest has no utterances");
    throw Error(ErrorCode::kInvalidArgument,
                "manifest holds " + std::to_string(speakers.size()) +
                    " speakers; pass --speaker to choose the reference speaker");
}

SelectionConfig selection_config(const std::string& mode, const std::string& occurrence,
                                 std::size_t min_len, std::size_t max_len, std::uint64_t seed) {
    SelectionConfig cfg;
    cfg.sampling_mode = parse_sampling_mode(mode);
    cfg.occurrence_policy = parse_occurrence_policy(occurrence);
    cfg.min_len = min_len;
    cfg.max_len = max_len;
    cfg.seed = seed;
    if (min_len < 1 || min_len > max_len) {
        throw Error(ErrorCode::kInvalidArgument, "need 1 <= --min-len <= --max-len");
    }
    return cfg;
}

// ---------------------------------------------------------------------------

struct TrainCodebookArgs {
    std::string manifest;
    std::size_t k = kDefaultNumClusters;
    std::size_t iters = 100;
    double tol = 1e-4;
    std::string out;
};

void cmd_train_codebook(const TrainCodebookArgs& a, const GlobalOptions& g) {
    const Manifest manifest = load_manifest(a.manifest);
    if (manifest.entries.empty()) throw Error(ErrorCode::kEmptyInput, "manifest has no utterances");

    std::vector<FeatureMatrix> matrices;
    for (const auto& e : manifest.entries) matrices.push_back(read_features(e.feature_path, e.utterance_id));

    KMeansConfig cfg;
    cfg.k = a.k;
    cfg.max_iters = a.iters;
    cfg.rel_tol = a.tol;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    spdlog::info("train-codebook k={} utterances={}", cfg.k, matrices.size());
    const KMeansResult result = train_codebook(matrices, cfg);

    OutputSet outputs;
    ensure_parent(a.out);
    write_codebook(result.codebook, outputs.add(a.out));
    outputs.commit();
    spdlog::info("train-codebook iterations={} converged={}", result.iterations, result.converged);
    std::cout << "final_objective " << result.objective.back() << "\n";
}

struct TokenizeArgs {
    std::string manifest;
    std::string codebook;
    std::string out_dir;
};

void cmd_tokenize(const TokenizeArgs& a, const GlobalOptions& g) {
    const Manifest manifest = load_manifest(a.manifest);
    const Codebook cb = read_codebook(a.codebook);

    OutputSet outputs;
    ensure_dir(a.out_dir);
    const fs::path out_dir = fs::absolute(a.out_dir);
    Manifest augmented;
    for (const auto& e : manifest.entries) {
        const FeatureMatrix features = read_features(e.feature_path, e.utterance_id);
        const UnitSequence units = assign_units(features, cb, g.threads);
        const fs::path units_path = out_dir / (file_safe(e.utterance_id) + ".usuq");
        write_units(units, outputs.add(units_path));
        ManifestEntry entry = e;
        entry.feature_path = fs::absolute(e.feature_path);
        entry.units_path = units_path;
        augmented.entries.push_back(std::move(entry));
    }
    write_manifest(augmented, outputs.add(out_dir / "manifest.jsonl"));
    outputs.commit();
    spdlog::info("tokenize utterances={} out_dir={}", augmented.entries.size(), out_dir.string());
}

struct BuildPoolArgs {
    std::string manifest;
    std::string speaker;
    std::string codebook;
    std::size_t min_len = kDefaultMinMatchLen;
    std::size_t max_len = kDefaultMaxMatchLen;
    std::string out;
};

ReferencePool pool_from_manifest(const std::string& manifest_path, const std::string& speaker_flag,
                                 const Codebook& cb, std::size_t min_len, std::size_t max_len,
                                 std::size_t threads) {
    const Manifest manifest = load_manifest(manifest_path);
    const std::string speaker = resolve_speaker(manifest, speaker_flag);
    const auto entries = manifest.for_speaker(speaker);
    auto utterances = load_utterances(entries, cb, threads);
    spdlog::info("pool speaker={} utterances={}", speaker, utterances.size());
    return build_pool(std::move(utterances), cb, min_len, max_len);
}

void cmd_build_pool(const BuildPoolArgs& a, const GlobalOptions& g) {
    if (a.min_len < 1 || a.min_len > a.max_len) {
        throw Error(ErrorCode::kInvalidArgument, "need 1 <= --min-len <= --max-len");
    }
    const Codebook cb = read_codebook(a.codebook);
    const ReferencePool pool = pool_from_manifest(a.manifest, a.speaker, cb, a.min_len, a.max_len, g.threads);
    OutputSet outputs;
    ensure_parent(a.out);
    write_pool_cache(pool, outputs.add(a.out));
    outputs.commit();
    spdlog::info("build-pool frames={}", pool.total_frames());
}

struct SelectArgs {
    std::string predicted_units;
    std::string ref_manifest;
    std::string pool;
    std::string speaker;
    std::string codebook;
    std::string mode = "avg";
    std::size_t max_len = kDefaultMaxMatchLen;
    std::size_t min_len = kDefaultMinMatchLen;
    std::string occurrence = "earliest";
    std::string out_features;
    std::string out_trace;
};

void cmd_select(const SelectArgs& a, const GlobalOptions& g) {
    const SelectionConfig cfg = selection_config(a.mode, a.occurrence, a.min_len, a.max_len, g.seed);
    if (a.ref_manifest.empty() == a.pool.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "pass exactly one of --ref-manifest or --pool");
    }
    const Codebook cb = read_codebook(a.codebook);
    const UnitSequence predicted = read_units(a.predicted_units);
    const ReferencePool pool =
        a.pool.empty() ? pool_from_manifest(a.ref_manifest, a.speaker, cb, cfg.min_len, cfg.max_len, g.threads)
                       : read_pool_cache(a.pool, cb);

    const SelectionResult result = select_frames(predicted, pool, cb, cfg);

    OutputSet outputs;
    ensure_parent(a.out_features);
    write_features(result.features, outputs.add(a.out_features));
    if (!a.out_trace.empty()) {
        ensure_parent(a.out_trace);
        write_trace(result, predicted, pool, outputs.add(a.out_trace));
    }
    outputs.commit();
    spdlog::info("select utterance={} frames={} coverage={:.4f}", predicted.utterance_id(), predicted.size(),
                 result.coverage());
}

struct VocoderPairsArgs {
    std::string manifest;
    std::string codebook;
    std::string mode = "avg";
    std::size_t max_len = kDefaultMaxMatchLen;
    std::size_t min_len = kDefaultMinMatchLen;
    std::string occurrence = "earliest";
    std::string out_dir;
};

void cmd_prepare_vocoder_pairs(const VocoderPairsArgs& a, const GlobalOptions& g) {
    const SelectionConfig cfg = selection_config(a.mode, a.occurrence, a.min_len, a.max_len, g.seed);
    const Manifest manifest = load_manifest(a.manifest);
    const Codebook cb = read_codebook(a.codebook);

    OutputSet outputs;
    ensure_dir(a.out_dir);
    const fs::path out_dir = fs::absolute(a.out_dir);
    std::string index;
    std::size_t pairs = 0;
    for (const auto& speaker : manifest.speakers()) {
        const auto entries = manifest.for_speaker(speaker);
        const auto utterances = load_utterances(entries, cb, g.threads);
        const auto results = leave_one_out_pairs(utterances, cb, cfg);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            const std::string name = file_safe(r.utterance_id) + ".usfm";
            write_features(r.selection.features, outputs.add(out_dir / name));
            nlohmann::ordered_json row;
            row["utterance_id"] = r.utterance_id;
            row["speaker_id"] = speaker;
            row["selected_features"] = name;
            row["target_feature_path"] = fs::absolute(entries[i].feature_path).generic_string();
            row["coverage"] = r.selection.coverage();
            index += row.dump() + "\n";
            ++pairs;
        }
    }
    write_text(outputs.add(out_dir / "pairs.jsonl"), index);
    outputs.commit();
    spdlog::info("prepare-vocoder-pairs pairs={} out_dir={}", pairs, out_dir.string());
}

struct EvalArgs {
    std::string manifest;
    std::string codebook;
    std::vector<std::string> speakers;
    std::string durations = "30s,1min,3min";
    std::size_t n_targets = 5;
    std::string mode = "avg";
    std::size_t max_len = kDefaultMaxMatchLen;
    std::size_t min_len = kDefaultMinMatchLen;
    std::string occurrence = "earliest";
    std::string out_report;
};

void cmd_eval(const EvalArgs& a, const GlobalOptions& g) {
    const SelectionConfig cfg = selection_config(a.mode, a.occurrence, a.min_len, a.max_len, g.seed);
    if (a.n_targets == 0) throw Error(ErrorCode::kInvalidArgument, "--n-targets must be positive");
    const Manifest manifest = load_manifest(a.manifest);
    const Codebook cb = read_codebook(a.codebook);
    const auto durations = parse_durations(a.durations);

    std::vector<std::string> speakers = a.speakers.empty() ? manifest.speakers() : a.speakers;
    std::vector<SpeakerSplit> splits;
    for (const auto& speaker : speakers) {
        const auto entries = manifest.for_speaker(speaker);
        if (entries.size() < 2) {
            spdlog::warn("eval: speaker '{}' has {} utterance(s); skipped", speaker, entries.size());
            continue;
        }
        auto utterances = load_utterances(entries, cb, g.threads);
        const std::size_t n_targets = std::min(a.n_targets, utterances.size() - 1);
        SpeakerSplit split;
        split.speaker_id = speaker;
        split.targets.assign(utterances.begin(), utterances.begin() + static_cast<std::ptrdiff_t>(n_targets));
        split.references.assign(utterances.begin() + static_cast<std::ptrdiff_t>(n_targets), utterances.end());
        splits.push_back(std::move(split));
    }
    if (splits.empty()) throw Error(ErrorCode::kEmptyInput, "no speaker with at least two utterances");

    const auto rows = reference_duration_sweep(splits, durations, cb, cfg, g.threads);

    OutputSet outputs;
    ensure_parent(a.out_report);
    write_text(outputs.add(a.out_report), sweep_to_json(rows).dump(2) + "\n");
    outputs.commit();
    std::cout << sweep_to_table(rows);
}

struct SynthArgs {
    std::string out_dir;
    SyntheticCorpusConfig corpus;
};

void cmd_synth_corpus(SynthArgs a, const GlobalOptions& g) {
    a.corpus.seed = g.seed;
    a.corpus.threads = g.threads;
    const SyntheticCorpus corpus = generate_synthetic_corpus(a.corpus);

    OutputSet outputs;
    ensure_dir(a.out_dir);
    const fs::path out_dir = fs::absolute(a.out_dir);
    ensure_dir(out_dir / "features");
    write_codebook(corpus.codebook, outputs.add(out_dir / "codebook.uscb"));
    Manifest manifest;
    auto emit = [&](const std::string& speaker, const Utterance& utt) {
        const fs::path path = out_dir / "features" / (file_safe(utt.id()) + ".usfm");
        write_features(utt.features(), outputs.add(path));
        ManifestEntry entry;
        entry.utterance_id = utt.id();
        entry.speaker_id = speaker;
        entry.feature_path = path;
        entry.duration_ms = static_cast<std::int64_t>(utt.num_frames()) * kDefaultFrameHopMs;
        manifest.entries.push_back(std::move(entry));
    };
    for (const auto& speaker : corpus.speakers) {
        for (const auto& utt : speaker.targets) emit(speaker.speaker_id, utt);
        for (const auto& utt : speaker.references) emit(speaker.speaker_id, utt);
    }
    write_manifest(manifest, outputs.add(out_dir / "manifest.jsonl"));
    outputs.commit();
    spdlog::info("synth-corpus speakers={} utterances={}", corpus.speakers.size(), manifest.entries.size());
}

void configure_logging(const std::string& level) {
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("unitsel");
        l->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
        return l;
    }();
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Discrete-unit frame selection engine"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--threads", global.threads, "Worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--log-level", global.log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
        ->capture_default_str();

    const auto mode_check = CLI::IsMember({"avg", "rand"});
    const auto occurrence_check = CLI::IsMember({"earliest", "random"});
    auto add_selection_flags = [&](CLI::App* sub, std::string& mode, std::string& occurrence,
                                   std::size_t& min_len, std::size_t& max_len) {
        sub->add_option("--mode", mode, "Inverse k-means sampling: avg or rand")
            ->check(mode_check)
            ->capture_default_str();
        sub->add_option("--max-len", max_len, "Longest matched sub-sequence")->capture_default_str();
        sub->add_option("--min-len", min_len, "Shortest matched sub-sequence")->capture_default_str();
        sub->add_option("--occurrence", occurrence, "Occurrence choice: earliest or random")
            ->check(occurrence_check)
            ->capture_default_str();
    };

    TrainCodebookArgs train;
    auto* train_cmd = app.add_subcommand("train-codebook", "Train the k-means codebook");
    train_cmd->add_option("--manifest", train.manifest)->required();
    train_cmd->add_option("--k", train.k, "Cluster count")->capture_default_str();
    train_cmd->add_option("--iters", train.iters, "Maximum Lloyd iterations")->capture_default_str();
    train_cmd->add_option("--tol", train.tol, "Relative objective improvement to stop")->capture_default_str();
    train_cmd->add_option("--out", train.out)->required();

    TokenizeArgs tok;
    auto* tok_cmd = app.add_subcommand("tokenize", "Assign units to every manifest utterance");
    tok_cmd->add_option("--manifest", tok.manifest)->required();
    tok_cmd->add_option("--codebook", tok.codebook)->required();
    tok_cmd->add_option("--out-dir", tok.out_dir)->required();

    BuildPoolArgs pool;
    auto* pool_cmd = app.add_subcommand("build-pool", "Write a reference pool cache for one speaker");
    pool_cmd->add_option("--manifest", pool.manifest)->required();
    pool_cmd->add_option("--speaker", pool.speaker);
    pool_cmd->add_option("--codebook", pool.codebook)->required();
    pool_cmd->add_option("--max-len", pool.max_len)->capture_default_str();
    pool_cmd->add_option("--min-len", pool.min_len)->capture_default_str();
    pool_cmd->add_option("--out", pool.out)->required();

    SelectArgs sel;
    auto* sel_cmd = app.add_subcommand("select", "Select frames for a predicted unit sequence");
    sel_cmd->add_option("--predicted-units", sel.predicted_units)->required();
    sel_cmd->add_option("--ref-manifest", sel.ref_manifest);
    sel_cmd->add_option("--pool", sel.pool, "Pool cache from build-pool");
    sel_cmd->add_option("--speaker", sel.speaker);
    sel_cmd->add_option("--codebook", sel.codebook)->required();
    add_selection_flags(sel_cmd, sel.mode, sel.occurrence, sel.min_len, sel.max_len);
    sel_cmd->add_option("--out-features", sel.out_features)->required();
    sel_cmd->add_option("--out-trace", sel.out_trace);

    VocoderPairsArgs voc;
    auto* voc_cmd = app.add_subcommand("prepare-vocoder-pairs", "Leave-one-out selection per speaker");
    voc_cmd->add_option("--manifest", voc.manifest)->required();
    voc_cmd->add_option("--codebook", voc.codebook)->required();
    add_selection_flags(voc_cmd, voc.mode, voc.occurrence, voc.min_len, voc.max_len);
    voc_cmd->add_option("--out-dir", voc.out_dir)->required();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Reference-duration sweep");
    eval_cmd->add_option("--manifest", ev.manifest)->required();
    eval_cmd->add_option("--codebook", ev.codebook)->required();
    eval_cmd->add_option("--speaker", ev.speakers, "Speakers to evaluate (default: all)");
    eval_cmd->add_option("--durations", ev.durations, "Comma-separated pool sizes")->capture_default_str();
    eval_cmd->add_option("--n-targets", ev.n_targets, "Leading utterances per speaker used as targets")
        ->capture_default_str();
    add_selection_flags(eval_cmd, ev.mode, ev.occurrence, ev.min_len, ev.max_len);
    eval_cmd->add_option("--out-report", ev.out_report)->required();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth-corpus", "Write a seeded synthetic corpus");
    synth_cmd->add_option("--out-dir", synth.out_dir)->required();
    synth_cmd->add_option("--speakers", synth.corpus.num_speakers)->capture_default_str();
    synth_cmd->add_option("--clusters", synth.corpus.num_clusters)->capture_default_str();
    synth_cmd->add_option("--dim", synth.corpus.dim)->capture_default_str();
    synth_cmd->add_option("--ref-frames", synth.corpus.reference_frames_per_speaker)->capture_default_str();
    synth_cmd->add_option("--targets", synth.corpus.targets_per_speaker)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    configure_logging(global.log_level);
    try {
        if (*train_cmd) cmd_train_codebook(train, global);
        else if (*tok_cmd) cmd_tokenize(tok, global);
        else if (*pool_cmd) cmd_build_pool(pool, global);
        else if (*sel_cmd) cmd_select(sel, global);
        else if (*voc_cmd) cmd_prepare_vocoder_pairs(voc, global);
        else if (*eval_cmd) cmd_eval(ev, global);
        else if (*synth_cmd) cmd_synth_corpus(synth, global);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}

}  // namespace unitsel::cli
