#pragma once

#include "advaudio/audio_io.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace advaudio {

/// MFCC front-end parameters. Defaults: 30 ms Hann frames every 10 ms,
/// 512-point FFT, 40 mel bands over 20-7600 Hz, 10 cepstra.
struct DspConfig {
    std::size_t frame_length = 480;
    std::size_t hop_length = 160;
    std::size_t fft_size = 512;
    std::size_t num_mel_filters = 40;
    std::size_t num_cepstra = 10;
    double fmin = 20.0;
    double fmax = 7600.0;
    double log_floor = 1e-6;
    std::uint32_t sample_rate = kCanonicalSampleRate;

    /// Throws InvalidConfig when the invariants between fields do not hold.
    void validate() const;

    std::size_t num_bins() const noexcept { return fft_size / 2 + 1; }
    /// floor((clip_length - frame_length) / hop_length) + 1; 0 if too short.
    std::size_t num_frames(std::size_t clip_length) const noexcept;

    friend bool operator==(const DspConfig&, const DspConfig&) = default;
};

/// Row-major [num_frames x num_cepstra].
struct FeatureMatrix {
    std::size_t num_frames = 0;
    std::size_t num_coeffs = 0;
    std::vector<double> values;
    DspConfig config;

    double at(std::size_t frame, std::size_t coeff) const { return values[frame * num_coeffs + coeff]; }
    std::span<const double> row(std::size_t frame) const
    {
        return std::span<const double>(values).subspan(frame * num_coeffs, num_coeffs);
    }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Frame i covers samples [i*hop, i*hop + frame_length), scaled by 1/32768.
/// Throws ClipTooShort when fewer than frame_length samples are given.
std::vector<std::vector<double>> frame_signal(std::span<const std::int16_t> samples, const DspConfig& config);

/// |X[k]|^2 for k = 0..fft_size/2 of a real frame zero-padded to fft_size.
/// Backed by an FFTW r2c plan that is created once per size and shared; each
/// instance owns its own buffers, so use one instance per thread.
class RealPowerSpectrum {
public:
    explicit RealPowerSpectrum(std::size_t fft_size);
    ~RealPowerSpectrum();

    RealPowerSpectrum(const RealPowerSpectrum&) = delete;
    RealPowerSpectrum& operator=(const RealPowerSpectrum&) = delete;

    std::size_t fft_size() const noexcept { return size_; }
    void operator()(std::span<const double> input, std::span<double> out);

private:
    std::size_t size_;
    void* plan_ = nullptr;
    double* input_ = nullptr;   // fftw_malloc'd, size_
    double* output_ = nullptr;  // fftw_malloc'd, interleaved complex, size_/2 + 1
};

/// Periodic Hann window: w[n] = 0.5 - 0.5 cos(2 pi n / length).
std::vector<double> hann_window(std::size_t length);

/// |DFT|^2 of the Hann-windowed frame zero-padded to fft_size, bins 0..fft_size/2.
/// No 1/N scaling: sum over all N bins equals N * sum(windowed^2).
std::vector<double> power_spectrum(std::span<const double> frame, const DspConfig& config);

/// Triangular filters on the mel scale. `weights` is row-major
/// [num_filters x num_bins]; each row is nonzero only on [first_bin, last_bin).
struct MelFilterbank {
    std::size_t num_filters = 0;
    std::size_t num_bins = 0;
    std::vector<double> weights;
    std::vector<double> center_hz;
    std::vector<std::size_t> first_bin;
    std::vector<std::size_t> last_bin;

    double at(std::size_t filter, std::size_t bin) const { return weights[filter * num_bins + bin]; }
};

/// Throws DegenerateFilter when two adjacent filter centers round to the same
/// FFT bin.
MelFilterbank mel_filterbank(const DspConfig& config);

/// Orthonormal DCT-II, first `num_out` coefficients.
std::vector<double> dct_ii(std::span<const double> input, std::size_t num_out);

/// Precomputes window, FFT plan, filterbank and DCT basis for repeated use.
/// Read-only after construction, so one instance can be shared across threads.
class MfccExtractor {
public:
    explicit MfccExtractor(const DspConfig& config);

    const DspConfig& config() const noexcept { return config_; }
    const MelFilterbank& filterbank() const noexcept { return filterbank_; }

    FeatureMatrix operator()(std::span<const std::int16_t> samples) const;
    FeatureMatrix operator()(const AudioClip& clip) const;

private:
    DspConfig config_;
    std::vector<double> scaled_window_; // Hann / 32768
    MelFilterbank filterbank_;
    std::vector<double> dct_basis_; // [num_cepstra x num_mel_filters]
};

/// power spectrum -> mel energies -> log(energy + log_floor) -> DCT-II per frame.
FeatureMatrix mfcc(const AudioClip& clip, const DspConfig& config);

} // namespace advaudio
