#pragma once

#include "advaudio/audio_io.hpp"

#include <cstdint>

namespace advaudio {

/// Size of the perturbation between an original clip and its adversarial copy,
/// computed on integer sample deltas.
struct NoiseReport {
    std::size_t changed_sample_count = 0;
    double changed_fraction = 0.0;
    std::int32_t max_abs_delta = 0;
    double rms_delta = 0.0;
    /// 10 log10(signal power / noise power); +inf when nothing changed.
    double snr_db = 0.0;
};

/// Throws LengthMismatch when the clips differ in length.
NoiseReport noise_metrics(const AudioClip& original, const AudioClip& adversarial);

} // namespace advaudio
