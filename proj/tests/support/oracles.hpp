#pragma once

// Reference implementations and constructed classifiers used by the unit and
// acceptance tests. Nothing here calls into the DSP code under test.

#include "advaudio/audio_io.hpp"
#include "advaudio/oracle.hpp"
#include "advaudio/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace advaudio::testing {

/// |X[k]|^2, k = 0..n_fft/2, of frame * periodic Hann, zero-padded, by the
/// O(N^2) definition in long double.
inline std::vector<double> brute_force_power(std::span<const double> frame, std::size_t n_fft)
{
    const long double pi = std::numbers::pi_v<long double>;
    const std::size_t n = frame.size();
    std::vector<long double> x(n_fft, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        const long double w = 0.5L * (1.0L - std::cos(2.0L * pi * static_cast<long double>(i) / static_cast<long double>(n)));
        x[i] = static_cast<long double>(frame[i]) * w;
    }
    std::vector<double> out(n_fft / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        long double re = 0.0L;
        long double im = 0.0L;
        for (std::size_t t = 0; t < n_fft; ++t) {
            // Reduce k*t mod N first so the angle stays small.
            const long double angle = 2.0L * pi * static_cast<long double>((k * t) % n_fft) / static_cast<long double>(n_fft);
            re += x[t] * std::cos(angle);
            im -= x[t] * std::sin(angle);
        }
        out[k] = static_cast<double>(re * re + im * im);
    }
    return out;
}

/// Inverse of the orthonormal DCT-II (an orthonormal DCT-III) for a full
/// length-n coefficient vector.
inline std::vector<double> inverse_dct_ii(std::span<const double> coeffs)
{
    const std::size_t n = coeffs.size();
    std::vector<double> out(n, 0.0);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = coeffs[0] * std::sqrt(1.0 / static_cast<double>(n));
        for (std::size_t k = 1; k < n; ++k) {
            acc += coeffs[k] * std::sqrt(2.0 / static_cast<double>(n))
                * std::cos(pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
        }
        out[i] = acc;
    }
    return out;
}

/// Counts queries; derived classes supply the probabilities.
class CountingOracle : public Oracle {
public:
    std::uint64_t query_count() const override { return count_.load(); }

protected:
    void tick() const { ++count_; }

private:
    mutable std::atomic<std::uint64_t> count_{0};
};

/// Two labels. The target (label 1) probability rises linearly with the low
/// byte of one watched sample: p1 = 0.1 + 0.5 * low / 255, so label 1 wins
/// only once the low byte exceeds 204. Every other sample is ignored.
class MonotoneOracle final : public CountingOracle {
public:
    explicit MonotoneOracle(std::size_t watched) : watched_(watched) {}

    ProbVector predict(const AudioClip& clip) const override
    {
        tick();
        const int low = static_cast<int>(static_cast<std::uint16_t>(clip.samples.at(watched_)) & 0xFF);
        const double p1 = 0.1 + 0.5 * low / 255.0;
        return ProbVector{{1.0 - p1, p1}};
    }

    static constexpr std::size_t kTarget = 1;

private:
    std::size_t watched_;
};

/// A clip of random samples whose watched sample has low byte 0, so the
/// monotone oracle starts firmly at label 0.
inline AudioClip monotone_fixture(std::size_t length, std::size_t watched, std::uint64_t seed)
{
    Rng rng(seed);
    AudioClip clip;
    clip.samples.resize(length);
    for (auto& s : clip.samples) {
        s = static_cast<std::int16_t>(rng.uniform_int(-8000, 8000));
    }
    clip.samples[watched] = 0x1200;
    return clip;
}

/// Three labels with label 0 barely ahead on the reference clip; any change
/// to any sample hands the lead to label 1.
class NearTieOracle final : public CountingOracle {
public:
    explicit NearTieOracle(AudioClip reference) : reference_(std::move(reference)) {}

    ProbVector predict(const AudioClip& clip) const override
    {
        tick();
        double moved = 0.0;
        for (std::size_t i = 0; i < clip.samples.size(); ++i) {
            moved += std::abs(static_cast<double>(clip.samples[i]) - reference_.samples[i]);
        }
        const double shift = std::min(moved * 1e-4, 0.1);
        return ProbVector{{0.4501 - shift, 0.4499 + shift, 0.1}};
    }

private:
    AudioClip reference_;
};

} // namespace advaudio::testing
