#include "advaudio/network.hpp"

#include "advaudio/error.hpp"
#include "advaudio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace advaudio {

void Architecture::validate() const
{
    const bool ok = input_rows >= kernel_rows && input_cols >= kernel_cols && kernel_rows > 0 && kernel_cols > 0
        && pool > 0 && conv_filters > 0 && hidden > 0 && num_classes >= 2 && pool_rows() > 0 && pool_cols() > 0;
    if (!ok) {
        throw Error(ErrorCode::ModelShapeMismatch,
                    "architecture has an empty layer for input " + std::to_string(input_rows) + "x"
                        + std::to_string(input_cols) + " and " + std::to_string(num_classes) + " classes");
    }
}

std::size_t Tensor::expected_size() const
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Network::Network(const Architecture& arch)
    : arch_(arch)
{
    arch_.validate();
    auto make = [](std::string name, std::vector<std::size_t> shape) {
        Tensor t{std::move(name), std::move(shape), {}};
        t.data.assign(t.expected_size(), 0.0);
        return t;
    };
    params_.push_back(make("conv.weight", {arch.conv_filters, arch.kernel_rows, arch.kernel_cols}));
    params_.push_back(make("conv.bias", {arch.conv_filters}));
    params_.push_back(make("hidden.weight", {arch.hidden, arch.flat_size()}));
    params_.push_back(make("hidden.bias", {arch.hidden}));
    params_.push_back(make("output.weight", {arch.num_classes, arch.hidden}));
    params_.push_back(make("output.bias", {arch.num_classes}));
    input_mean_.assign(arch.input_cols, 0.0);
    input_scale_.assign(arch.input_cols, 1.0);
}

void Network::initialize(std::uint64_t seed)
{
    Rng rng(seed);
    auto he = [&rng](Tensor& t, std::size_t fan_in) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& w : t.data) {
            w = stddev * rng.normal();
        }
    };
    he(params_[ConvWeight], arch_.kernel_rows * arch_.kernel_cols);
    he(params_[HiddenWeight], arch_.flat_size());
    he(params_[OutputWeight], arch_.hidden);
    for (std::size_t slot : {ConvBias, HiddenBias, OutputBias}) {
        std::fill(params_[slot].data.begin(), params_[slot].data.end(), 0.0);
    }
}

void Network::check_shapes() const
{
    arch_.validate();
    const Network reference(arch_);
    if (params_.size() != reference.params_.size()) {
        throw Error(ErrorCode::ModelShapeMismatch, "expected " + std::to_string(reference.params_.size())
                        + " parameter tensors, got " + std::to_string(params_.size()));
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Tensor& want = reference.params_[i];
        const Tensor& got = params_[i];
        if (got.shape != want.shape || got.data.size() != want.data.size()) {
            throw Error(ErrorCode::ModelShapeMismatch, "tensor " + want.name + " has the wrong shape");
        }
    }
    if (input_mean_.size() != arch_.input_cols || input_scale_.size() != arch_.input_cols) {
        throw Error(ErrorCode::ModelShapeMismatch, "input standardization width differs from input_cols");
    }
}

std::vector<Tensor> Network::zero_like_params() const
{
    std::vector<Tensor> out = params_;
    for (Tensor& t : out) {
        std::fill(t.data.begin(), t.data.end(), 0.0);
    }
    return out;
}

struct Network::Activations {
    std::vector<double> input;      // standardized [rows x cols]
    std::vector<double> conv;       // post-ReLU [F x conv_rows x conv_cols]
    std::vector<double> pooled;     // [F x pool_rows x pool_cols]
    std::vector<std::size_t> pool_src; // index into conv for each pooled value
    std::vector<double> hidden;     // post-ReLU
    std::vector<double> logits;
};

void Network::forward(std::span<const double> features, Activations& act) const
{
    const Architecture& a = arch_;
    if (features.size() != a.input_rows * a.input_cols) {
        throw Error(ErrorCode::ModelShapeMismatch, "feature matrix has " + std::to_string(features.size())
                        + " values, network expects " + std::to_string(a.input_rows * a.input_cols));
    }
    act.input.resize(features.size());
    for (std::size_t r = 0; r < a.input_rows; ++r) {
        for (std::size_t c = 0; c < a.input_cols; ++c) {
            const std::size_t i = r * a.input_cols + c;
            act.input[i] = (features[i] - input_mean_[c]) * input_scale_[c];
        }
    }

    const std::size_t cr = a.conv_rows();
    const std::size_t cc = a.conv_cols();
    const auto& kw = params_[ConvWeight].data;
    const auto& kb = params_[ConvBias].data;
    act.conv.assign(a.conv_filters * cr * cc, 0.0);
    for (std::size_t f = 0; f < a.conv_filters; ++f) {
        const double* kernel = kw.data() + f * a.kernel_rows * a.kernel_cols;
        for (std::size_t r = 0; r < cr; ++r) {
            for (std::size_t c = 0; c < cc; ++c) {
                double acc = kb[f];
                for (std::size_t i = 0; i < a.kernel_rows; ++i) {
                    const double* in = act.input.data() + (r + i) * a.input_cols + c;
                    const double* k = kernel + i * a.kernel_cols;
                    for (std::size_t j = 0; j < a.kernel_cols; ++j) {
                        acc += k[j] * in[j];
                    }
                }
                act.conv[(f * cr + r) * cc + c] = acc > 0.0 ? acc : 0.0;
            }
        }
    }

    const std::size_t pr = a.pool_rows();
    const std::size_t pc = a.pool_cols();
    act.pooled.assign(a.conv_filters * pr * pc, 0.0);
    act.pool_src.assign(act.pooled.size(), 0);
    for (std::size_t f = 0; f < a.conv_filters; ++f) {
        for (std::size_t r = 0; r < pr; ++r) {
            for (std::size_t c = 0; c < pc; ++c) {
                std::size_t best = (f * cr + r * a.pool) * cc + c * a.pool;
                for (std::size_t i = 0; i < a.pool; ++i) {
                    for (std::size_t j = 0; j < a.pool; ++j) {
                        const std::size_t src = (f * cr + r * a.pool + i) * cc + c * a.pool + j;
                        if (act.conv[src] > act.conv[best]) {
                            best = src;
                        }
                    }
                }
                const std::size_t dst = (f * pr + r) * pc + c;
                act.pooled[dst] = act.conv[best];
                act.pool_src[dst] = best;
            }
        }
    }

    const std::size_t flat = a.flat_size();
    const auto& hw = params_[HiddenWeight].data;
    const auto& hb = params_[HiddenBias].data;
    act.hidden.assign(a.hidden, 0.0);
    for (std::size_t h = 0; h < a.hidden; ++h) {
        const double* w = hw.data() + h * flat;
        double acc = hb[h];
        for (std::size_t i = 0; i < flat; ++i) {
            acc += w[i] * act.pooled[i];
        }
        act.hidden[h] = acc > 0.0 ? acc : 0.0;
    }

    const auto& ow = params_[OutputWeight].data;
    const auto& ob = params_[OutputBias].data;
    act.logits.assign(a.num_classes, 0.0);
    for (std::size_t k = 0; k < a.num_classes; ++k) {
        const double* w = ow.data() + k * a.hidden;
        double acc = ob[k];
        for (std::size_t h = 0; h < a.hidden; ++h) {
            acc += w[h] * act.hidden[h];
        }
        act.logits[k] = acc;
    }
}

std::vector<double> Network::logits(std::span<const double> features) const
{
    Activations act;
    forward(features, act);
    return std::move(act.logits);
}

std::vector<double> Network::probabilities(std::span<const double> features) const
{
    return softmax(logits(features));
}

double Network::accumulate_gradient(std::span<const double> features, std::size_t label, std::vector<Tensor>& grad) const
{
    const Architecture& a = arch_;
    Activations act;
    forward(features, act);
    const std::vector<double> probs = softmax(act.logits);
    const double loss = -std::log(std::max(probs[label], std::numeric_limits<double>::min()));

    // dL/dlogits = p - onehot
    std::vector<double> d_logits = probs;
    d_logits[label] -= 1.0;

    auto& g_ow = grad[OutputWeight].data;
    auto& g_ob = grad[OutputBias].data;
    const auto& ow = params_[OutputWeight].data;
    std::vector<double> d_hidden(a.hidden, 0.0);
    for (std::size_t k = 0; k < a.num_classes; ++k) {
        g_ob[k] += d_logits[k];
        for (std::size_t h = 0; h < a.hidden; ++h) {
            g_ow[k * a.hidden + h] += d_logits[k] * act.hidden[h];
            d_hidden[h] += d_logits[k] * ow[k * a.hidden + h];
        }
    }
    for (std::size_t h = 0; h < a.hidden; ++h) {
        if (act.hidden[h] <= 0.0) {
            d_hidden[h] = 0.0;
        }
    }

    const std::size_t flat = a.flat_size();
    auto& g_hw = grad[HiddenWeight].data;
    auto& g_hb = grad[HiddenBias].data;
    const auto& hw = params_[HiddenWeight].data;
    std::vector<double> d_pooled(flat, 0.0);
    for (std::size_t h = 0; h < a.hidden; ++h) {
        const double d = d_hidden[h];
        if (d == 0.0) {
            continue;
        }
        g_hb[h] += d;
        double* gw = g_hw.data() + h * flat;
        const double* w = hw.data() + h * flat;
        for (std::size_t i = 0; i < flat; ++i) {
            gw[i] += d * act.pooled[i];
            d_pooled[i] += d * w[i];
        }
    }

    // Route through max-pool, then the conv ReLU.
    std::vector<double> d_conv(act.conv.size(), 0.0);
    for (std::size_t i = 0; i < flat; ++i) {
        const std::size_t src = act.pool_src[i];
        if (act.conv[src] > 0.0) {
            d_conv[src] += d_pooled[i];
        }
    }

    const std::size_t cr = a.conv_rows();
    const std::size_t cc = a.conv_cols();
    auto& g_kw = grad[ConvWeight].data;
    auto& g_kb = grad[ConvBias].data;
    for (std::size_t f = 0; f < a.conv_filters; ++f) {
        double* gk = g_kw.data() + f * a.kernel_rows * a.kernel_cols;
        for (std::size_t r = 0; r < cr; ++r) {
            for (std::size_t c = 0; c < cc; ++c) {
                const double d = d_conv[(f * cr + r) * cc + c];
                if (d == 0.0) {
                    continue;
                }
                g_kb[f] += d;
                for (std::size_t i = 0; i < a.kernel_rows; ++i) {
                    const double* in = act.input.data() + (r + i) * a.input_cols + c;
                    for (std::size_t j = 0; j < a.kernel_cols; ++j) {
                        gk[i * a.kernel_cols + j] += d * in[j];
                    }
                }
            }
        }
    }
    return loss;
}

std::vector<double> softmax(std::span<const double> logits)
{
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& p : out) {
        p /= total;
    }
    return out;
}

std::size_t argmax(std::span<const double> values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

} // namespace advaudio
