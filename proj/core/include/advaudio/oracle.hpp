#pragma once

#include "advaudio/audio_io.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace advaudio {

/// Probability scores over the K output labels of a classifier.
struct ProbVector {
    std::vector<double> probs;

    std::size_t size() const noexcept { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    /// Lowest index wins ties.
    std::size_t top() const;
};

/// The black-box view of a classifier: audio in, label probabilities out.
/// The attack engine sees nothing else.
class Oracle {
public:
    virtual ~Oracle() = default;

    virtual ProbVector predict(const AudioClip& clip) const = 0;
    /// Number of predict calls served so far. Monotone.
    virtual std::uint64_t query_count() const = 0;
};

} // namespace advaudio
