#pragma once

#include "advaudio/corpus.hpp"
#include "advaudio/dsp.hpp"
#include "advaudio/network.hpp"
#include "advaudio/oracle.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advaudio {

/// Ordered, unique label names (K >= 2). Index order is the model's output order.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& name(std::size_t index) const { return labels_.at(index); }
    const std::vector<std::string>& names() const noexcept { return labels_; }

    std::optional<std::size_t> find(const std::string& label) const;
    /// Throws UnknownLabel.
    std::size_t index_of(const std::string& label) const;

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::vector<std::string> labels_;
};

/// Keyword-spotting classifier used as the attack's black box.
///
/// Weights are held at float32 precision (the constructor rounds them), which
/// is also the on-disk precision, so save/load round trips are prediction-exact.
/// predict is const and thread-safe; the query counter is atomic.
class VictimModel final : public Oracle {
public:
    /// Throws ModelShapeMismatch if the network does not fit the label set or
    /// the front-end's frame count for a one-second clip.
    VictimModel(LabelSet labels, DspConfig dsp, Network network);

    VictimModel(const VictimModel& other);
    VictimModel& operator=(const VictimModel&) = delete;

    ProbVector predict(const AudioClip& clip) const override;
    std::uint64_t query_count() const override { return queries_.load(std::memory_order_relaxed); }

    /// Classifies precomputed features without touching the query counter.
    ProbVector predict_features(const FeatureMatrix& features) const;

    const LabelSet& labels() const noexcept { return labels_; }
    const DspConfig& dsp_config() const noexcept { return dsp_; }
    const MfccExtractor& extractor() const noexcept { return extractor_; }
    const Network& network() const noexcept { return network_; }

private:
    LabelSet labels_;
    DspConfig dsp_;
    MfccExtractor extractor_;
    Network network_;
    mutable std::atomic<std::uint64_t> queries_{0};
};

struct TrainingConfig {
    std::size_t epochs = 40;
    double learning_rate = 0.02;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    std::size_t conv_filters = 8;
    std::size_t hidden = 32;
};

/// Mini-batch SGD on cross-entropy. Labels are taken in first-appearance order.
/// Single-threaded and bit-deterministic for a given corpus and config.
/// Throws InsufficientData unless there are >= 2 labels with >= 2 clips each.
VictimModel train(const Corpus& corpus, const TrainingConfig& config, const DspConfig& dsp = {});

/// Fraction of clips whose top prediction equals their label. Throws
/// UnknownLabel for a clip whose label the model does not know.
double accuracy(const VictimModel& model, const Corpus& corpus);

/// Self-describing binary model file; see docs in README for the layout.
void save_model(const VictimModel& model, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const VictimModel& model);

/// Throws CorruptModel (bad magic, checksum, truncation) or ModelShapeMismatch.
VictimModel load_model(const std::filesystem::path& path);
VictimModel deserialize_model(std::span<const std::uint8_t> bytes);

inline std::uint64_t query_count(const Oracle& model) { return model.query_count(); }

} // namespace advaudio
