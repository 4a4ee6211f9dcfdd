#include "unitsel/synthetic_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "random.hpp"
#include "unitsel/error.hpp"
#include "unitsel/unit_tokenizer.hpp"

namespace unitsel {

namespace {

// Box-Muller on the portable uniform so corpora match across standard libraries.
double standard_normal(std::mt19937_64& rng) {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = detail::uniform_unit(rng);
    const double u2 = detail::uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t dim, double scale) {
    std::vector<double> v(dim);
    for (auto& x : v) x = scale * standard_normal(rng);
    return v;
}

class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cdf_[i] = total;
        }
        for (auto& c : cdf_) c /= total;
    }

    std::size_t operator()(std::mt19937_64& rng) const {
        const double u = detail::uniform_unit(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

struct Phrase {
    std::vector<std::uint32_t> units;
    std::vector<std::vector<double>> context;  // one vector per position
};

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& cfg) {
    if (cfg.num_speakers == 0 || cfg.num_clusters == 0 || cfg.dim == 0 || cfg.num_phrases == 0 ||
        cfg.min_phrase_len == 0 || cfg.min_phrase_len > cfg.max_phrase_len ||
        cfg.min_utterance_frames == 0 || cfg.min_utterance_frames > cfg.max_utterance_frames) {
        throw Error(ErrorCode::kInvalidArgument, "invalid synthetic corpus configuration");
    }
    std::mt19937_64 rng(cfg.seed);

    std::vector<float> centroids(cfg.num_clusters * cfg.dim);
    for (auto& c : centroids) c = static_cast<float>(cfg.centroid_scale * standard_normal(rng));
    Codebook codebook(cfg.num_clusters, cfg.dim, std::move(centroids));

    std::vector<Phrase> phrases(cfg.num_phrases);
    for (auto& p : phrases) {
        const std::size_t len =
            cfg.min_phrase_len + detail::uniform_index(rng, cfg.max_phrase_len - cfg.min_phrase_len + 1);
        for (std::size_t i = 0; i < len; ++i) {
            p.units.push_back(static_cast<std::uint32_t>(detail::uniform_index(rng, cfg.num_clusters)));
            p.context.push_back(normal_vector(rng, cfg.dim, cfg.context_scale));
        }
    }
    const ZipfSampler pick_phrase(cfg.num_phrases, cfg.zipf_exponent);

    SyntheticCorpus corpus{codebook, {}};
    for (std::size_t s = 0; s < cfg.num_speakers; ++s) {
        SpeakerSplit speaker;
        speaker.speaker_id = "spk" + std::to_string(s);
        const auto offset = normal_vector(rng, cfg.dim, cfg.speaker_scale);

        auto make_utterance = [&](const std::string& id) {
            const std::size_t target_len =
                cfg.min_utterance_frames +
                detail::uniform_index(rng, cfg.max_utterance_frames - cfg.min_utterance_frames + 1);
            std::vector<float> values;
            std::size_t frames = 0;
            while (frames < target_len) {
                const Phrase& p = phrases[pick_phrase(rng)];
                for (std::size_t i = 0; i < p.units.size(); ++i) {
                    const auto centroid = codebook.centroid(p.units[i]);
                    for (std::size_t d = 0; d < cfg.dim; ++d) {
                        const double v = centroid[d] + offset[d] + p.context[i][d] +
                                         cfg.noise_scale * standard_normal(rng);
                        values.push_back(static_cast<float>(v));
                    }
                }
                frames += p.units.size();
            }
            FeatureMatrix features(id, frames, cfg.dim, std::move(values));
            UnitSequence units = assign_units(features, codebook, cfg.threads);
            return Utterance(std::move(units), std::move(features));
        };

        for (std::size_t t = 0; t < cfg.targets_per_speaker; ++t) {
            speaker.targets.push_back(make_utterance(speaker.speaker_id + "_tgt" + std::to_string(t)));
        }
        std::size_t ref_frames = 0;
        for (std::size_t r = 0; ref_frames < cfg.reference_frames_per_speaker; ++r) {
            speaker.references.push_back(make_utterance(speaker.speaker_id + "_ref" + std::to_string(r)));
            ref_frames += speaker.references.back().num_frames();
        }
        corpus.speakers.push_back(std::move(speaker));
    }
    return corpus;
}

}  // namespace unitsel
