#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace advaudio {

/// Shape of the keyword-spotting network:
///   standardize -> conv2d(valid) -> ReLU -> maxpool -> dense -> ReLU -> dense -> softmax
/// The input is the MFCC matrix viewed as a single-channel image
/// [input_rows = frames, input_cols = cepstra].
struct Architecture {
    std::size_t input_rows = 0;
    std::size_t input_cols = 0;
    std::size_t conv_filters = 8;
    std::size_t kernel_rows = 3;
    std::size_t kernel_cols = 3;
    std::size_t pool = 2;
    std::size_t hidden = 32;
    std::size_t num_classes = 0;

    std::size_t conv_rows() const noexcept { return input_rows - kernel_rows + 1; }
    std::size_t conv_cols() const noexcept { return input_cols - kernel_cols + 1; }
    std::size_t pool_rows() const noexcept { return conv_rows() / pool; }
    std::size_t pool_cols() const noexcept { return conv_cols() / pool; }
    std::size_t flat_size() const noexcept { return conv_filters * pool_rows() * pool_cols(); }

    /// Throws ModelShapeMismatch if any derived dimension is empty.
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct Tensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;

    std::size_t expected_size() const;
};

class Network {
public:
    // Indices into params(); order is also the serialization order.
    enum Slot : std::size_t { ConvWeight, ConvBias, HiddenWeight, HiddenBias, OutputWeight, OutputBias, kNumSlots };

    Network() = default;
    /// All parameters zero, identity standardization.
    explicit Network(const Architecture& arch);

    const Architecture& architecture() const noexcept { return arch_; }

    std::vector<Tensor>& params() noexcept { return params_; }
    const std::vector<Tensor>& params() const noexcept { return params_; }

    /// Per-column (cepstral coefficient) standardization applied to the input.
    std::vector<double>& input_mean() noexcept { return input_mean_; }
    std::vector<double>& input_scale() noexcept { return input_scale_; }
    const std::vector<double>& input_mean() const noexcept { return input_mean_; }
    const std::vector<double>& input_scale() const noexcept { return input_scale_; }

    /// He-normal weights, zero biases.
    void initialize(std::uint64_t seed);

    /// Throws ModelShapeMismatch if any tensor disagrees with the architecture.
    void check_shapes() const;

    std::vector<double> logits(std::span<const double> features) const;
    std::vector<double> probabilities(std::span<const double> features) const;

    /// Cross-entropy of the softmax output against `label`. Adds dLoss/dParam
    /// into `grad` (same layout as params()) and returns the loss.
    double accumulate_gradient(std::span<const double> features, std::size_t label, std::vector<Tensor>& grad) const;

    std::vector<Tensor> zero_like_params() const;

private:
    struct Activations;
    void forward(std::span<const double> features, Activations& act) const;

    Architecture arch_;
    std::vector<Tensor> params_;
    std::vector<double> input_mean_;
    std::vector<double> input_scale_;
};

/// exp(x - max) / sum; the max subtraction keeps large logits finite.
std::vector<double> softmax(std::span<const double> logits);

/// Index of the largest value; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);

} // namespace advaudio
