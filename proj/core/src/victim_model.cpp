#include "advaudio/victim_model.hpp"

#include "advaudio/error.hpp"
#include "advaudio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace advaudio {


LabelSet::LabelSet(std::vector<std::string> labels)
    : labels_(std::move(labels))
{
    if (labels_.size() < 2) {
        throw Error(ErrorCode::ModelShapeMismatch, "a label set needs at least 2 labels");
    }
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty() || !seen.insert(l).second) {
            throw Error(ErrorCode::ModelShapeMismatch, "label '" + l + "' is empty or duplicated");
        }
    }
}

std::optional<std::size_t> LabelSet::find(const std::string& label) const
{
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t LabelSet::index_of(const std::string& label) const
{
    if (auto i = find(label)) {
        return *i;
    }
    throw Error(ErrorCode::UnknownLabel, "label '" + label + "' is not known to the model");
}

namespace {

void round_to_float(std::vector<double>& values)
{
    for (double& v : values) {
        v = static_cast<double>(static_cast<float>(v));
    }
}

} // namespace

VictimModel::VictimModel(LabelSet labels, DspConfig dsp, Network network)
    : labels_(std::move(labels))
    , dsp_(dsp)
    , extractor_(dsp)
    , network_(std::move(network))
{
    network_.check_shapes();
    const Architecture& arch = network_.architecture();
    if (arch.num_classes != labels_.size()) {
        throw Error(ErrorCode::ModelShapeMismatch, "output layer has " + std::to_string(arch.num_classes)
                        + " classes but the label set has " + std::to_string(labels_.size()));
    }
    const std::size_t frames = dsp_.num_frames(kCanonicalClipSamples);
    if (arch.input_rows != frames || arch.input_cols != dsp_.num_cepstra) {
        throw Error(ErrorCode::ModelShapeMismatch,
                    "network input " + std::to_string(arch.input_rows) + "x" + std::to_string(arch.input_cols)
                        + " does not match front-end output " + std::to_string(frames) + "x"
                        + std::to_string(dsp_.num_cepstra));
    }
    for (Tensor& t : network_.params()) {
        round_to_float(t.data);
    }
    round_to_float(network_.input_mean());
    round_to_float(network_.input_scale());
}

VictimModel::VictimModel(const VictimModel& other)
    : labels_(other.labels_)
    , dsp_(other.dsp_)
    , extractor_(other.extractor_)
    , network_(other.network_)
    , queries_(other.query_count())
{
}

ProbVector VictimModel::predict(const AudioClip& clip) const
{
    queries_.fetch_add(1, std::memory_order_relaxed);
    return predict_features(extractor_(clip));
}

ProbVector VictimModel::predict_features(const FeatureMatrix& features) const
{
    return ProbVector{network_.probabilities(features.values)};
}

VictimModel train(const Corpus& corpus, const TrainingConfig& config, const DspConfig& dsp)
{
    const std::vector<std::string> names = corpus_labels(corpus);
    std::map<std::string, std::size_t> counts;
    for (const auto& e : corpus) {
        ++counts[e.label()];
    }
    if (names.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "training needs at least 2 labels, corpus has " + std::to_string(names.size()));
    }
    for (const auto& [label, n] : counts) {
        if (n < 2) {
            throw Error(ErrorCode::InsufficientData, "label '" + label + "' has " + std::to_string(n) + " clip(s), need 2");
        }
    }
    if (config.batch_size == 0 || !(config.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "batch_size and learning_rate must be positive");
    }
    const LabelSet labels(names);

    const MfccExtractor extractor(dsp);
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> targets;
    features.reserve(corpus.size());
    for (const auto& e : corpus) {
        features.push_back(extractor(e.clip).values);
        targets.push_back(labels.index_of(e.label()));
    }

    Architecture arch;
    arch.input_rows = dsp.num_frames(kCanonicalClipSamples);
    arch.input_cols = dsp.num_cepstra;
    arch.conv_filters = config.conv_filters;
    arch.hidden = config.hidden;
    arch.num_classes = labels.size();
    Network net(arch);
    net.initialize(derive_seed(config.seed, 1));

    // Per-coefficient standardization from the training features.
    const std::size_t cols = arch.input_cols;
    std::vector<double> sum(cols, 0.0);
    std::vector<double> sum_sq(cols, 0.0);
    std::size_t rows = 0;
    for (const auto& f : features) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            sum[i % cols] += f[i];
            sum_sq[i % cols] += f[i] * f[i];
        }
        rows += f.size() / cols;
    }
    for (std::size_t c = 0; c < cols; ++c) {
        const double mean = sum[c] / static_cast<double>(rows);
        const double var = std::max(sum_sq[c] / static_cast<double>(rows) - mean * mean, 1e-12);
        net.input_mean()[c] = static_cast<float>(mean);
        net.input_scale()[c] = static_cast<float>(1.0 / std::sqrt(var));
    }

    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, 2, epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_below(i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            auto grad = net.zero_like_params();
            for (std::size_t b = start; b < end; ++b) {
                net.accumulate_gradient(features[order[b]], targets[order[b]], grad);
            }
            const double step = config.learning_rate / static_cast<double>(end - start);
            for (std::size_t t = 0; t < grad.size(); ++t) {
                auto& p = net.params()[t].data;
                const auto& g = grad[t].data;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    p[i] -= step * g[i];
                }
            }
        }
    }
    return VictimModel(labels, dsp, std::move(net));
}

double accuracy(const VictimModel& model, const Corpus& corpus)
{
    if (corpus.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const auto& e : corpus) {
        if (!e.clip.label) {
            throw Error(ErrorCode::UnknownLabel, "clip '" + e.id + "' has no label");
        }
        const std::size_t truth = model.labels().index_of(e.label());
        if (model.predict(e.clip).top() == truth) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(corpus.size());
}

} // namespace advaudio
