#include "advaudio/noise.hpp"

#include "advaudio/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace advaudio {

NoiseReport noise_metrics(const AudioClip& original, const AudioClip& adversarial)
{
    if (original.size() != adversarial.size()) {
        throw Error(ErrorCode::LengthMismatch, "original has " + std::to_string(original.size())
                        + " samples, adversarial has " + std::to_string(adversarial.size()));
    }
    NoiseReport r;
    if (original.size() == 0) {
        r.snr_db = std::numeric_limits<double>::infinity();
        return r;
    }
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const std::int32_t s = original.samples[i];
        const std::int32_t d = static_cast<std::int32_t>(adversarial.samples[i]) - s;
        signal += static_cast<double>(s) * s;
        noise += static_cast<double>(d) * d;
        if (d != 0) {
            ++r.changed_sample_count;
            r.max_abs_delta = std::max(r.max_abs_delta, std::abs(d));
        }
    }
    const double n = static_cast<double>(original.size());
    r.changed_fraction = static_cast<double>(r.changed_sample_count) / n;
    r.rms_delta = std::sqrt(noise / n);
    r.snr_db = noise == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(signal / noise);
    return r;
}

} // namespace advaudio
