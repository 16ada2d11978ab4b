#pragma once

#include "advaudio/audio_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace advaudio {

/// One labeled clip. `clip.label` always holds the label name.
struct CorpusEntry {
    std::string id;
    AudioClip clip;

    const std::string& label() const { return *clip.label; }
};

using Corpus = std::vector<CorpusEntry>;

/// Reads `<dir>/<label>/<clip>.wav`. Labels and clips are visited in sorted
/// order; each clip is padded or trimmed to one second and its id is the
/// file stem. Throws IoError when `dir` is not a directory.
Corpus load_corpus_dir(const std::filesystem::path& dir);

/// Writes the inverse layout of load_corpus_dir.
void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);

/// Label names in first-appearance order.
std::vector<std::string> corpus_labels(const Corpus& corpus);

struct SyntheticCorpusConfig {
    std::size_t num_labels = 4;
    std::size_t clips_per_label = 40;
    std::uint64_t seed = 0;
    // Burst peak level and background noise stddev, as fractions of full scale.
    double peak_min = 0.02;
    double peak_max = 0.12;
    double noise_min = 0.0005;
    double noise_max = 0.002;
};

/// Deterministic keyword-like corpus: each label is a short voiced burst with
/// its own pitch and pitch contour, randomized in onset, duration, level and
/// background noise. Supports up to 10 labels.
Corpus make_synthetic_corpus(const SyntheticCorpusConfig& config);

std::vector<std::string> synthetic_label_names(std::size_t num_labels);

} // namespace advaudio
