#include "advaudio/corpus.hpp"

#include "advaudio/error.hpp"
#include "advaudio/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace advaudio {

namespace fs = std::filesystem;

Corpus load_corpus_dir(const fs::path& dir)
{
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "corpus directory " + dir.string() + " does not exist");
    }
    std::vector<fs::path> label_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) {
            label_dirs.push_back(entry.path());
        }
    }
    std::sort(label_dirs.begin(), label_dirs.end());

    Corpus corpus;
    for (const auto& label_dir : label_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(label_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".wav") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            AudioClip clip = pad_or_trim(read_wav(file), kCanonicalClipSamples);
            clip.label = label_dir.filename().string();
            corpus.push_back({file.stem().string(), std::move(clip)});
        }
    }
    return corpus;
}

void write_corpus_dir(const Corpus& corpus, const fs::path& dir)
{
    std::error_code ec;
    for (const auto& e : corpus) {
        const fs::path label_dir = dir / e.label();
        fs::create_directories(label_dir, ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + label_dir.string() + ": " + ec.message());
        }
        write_wav(e.clip, label_dir / (e.id + ".wav"));
    }
}

std::vector<std::string> corpus_labels(const Corpus& corpus)
{
    std::vector<std::string> labels;
    std::set<std::string> seen;
    for (const auto& e : corpus) {
        if (!e.clip.label) {
            throw Error(ErrorCode::UnknownLabel, "clip '" + e.id + "' has no label");
        }
        if (seen.insert(e.label()).second) {
            labels.push_back(e.label());
        }
    }
    return labels;
}

namespace {

constexpr std::array<const char*, 10> kSyntheticNames
    = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet"};

// Pitch glide over the burst, as a ratio of end to start frequency.
constexpr std::array<double, 3> kContours = {1.0, 1.4, 0.7};

AudioClip synth_clip(std::size_t label, const SyntheticCorpusConfig& config, Rng& rng)
{
    constexpr double rate = kCanonicalSampleRate;
    const double f0 = 180.0 * std::pow(1.32, static_cast<double>(label)) * rng.uniform(0.96, 1.04);
    const double glide = kContours[label % kContours.size()];
    const double duration = rng.uniform(0.35, 0.6);
    const double onset = rng.uniform(0.05, 0.95 - duration);
    const double peak = rng.uniform(config.peak_min, config.peak_max);
    const double noise = rng.uniform(config.noise_min, config.noise_max);

    AudioClip clip;
    clip.samples.resize(kCanonicalClipSamples);
    double phase = 0.0;
    for (std::size_t n = 0; n < clip.samples.size(); ++n) {
        const double t = static_cast<double>(n) / rate;
        double value = noise * rng.normal();
        const double u = (t - onset) / duration;
        if (u >= 0.0 && u < 1.0) {
            const double freq = f0 * std::pow(glide, u);
            phase += 2.0 * std::numbers::pi * freq / rate;
            const double env = std::sin(std::numbers::pi * u);
            const double voiced = std::sin(phase) + 0.5 * std::sin(2.0 * phase) + 0.25 * std::sin(3.0 * phase);
            value += peak * env * env * voiced / 1.75;
        }
        const double scaled = std::round(value * 32768.0);
        clip.samples[n] = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    }
    return clip;
}

} // namespace

std::vector<std::string> synthetic_label_names(std::size_t num_labels)
{
    if (num_labels < 2 || num_labels > kSyntheticNames.size()) {
        throw Error(ErrorCode::InvalidConfig, "synthetic corpus supports 2..10 labels");
    }
    return {kSyntheticNames.begin(), kSyntheticNames.begin() + static_cast<std::ptrdiff_t>(num_labels)};
}

Corpus make_synthetic_corpus(const SyntheticCorpusConfig& config)
{
    const auto names = synthetic_label_names(config.num_labels);
    Corpus corpus;
    corpus.reserve(config.num_labels * config.clips_per_label);
    for (std::size_t label = 0; label < names.size(); ++label) {
        for (std::size_t i = 0; i < config.clips_per_label; ++i) {
            Rng rng(derive_seed(config.seed, label, i));
            AudioClip clip = synth_clip(label, config, rng);
            clip.label = names[label];
            char id[16];
            std::snprintf(id, sizeof(id), "%04zu", i);
            corpus.push_back({id, std::move(clip)});
        }
    }
    return corpus;
}

} // namespace advaudio
