#include "advaudio/dsp.hpp"

#include "advaudio/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace advaudio {

void DspConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (frame_length == 0) {
        fail("frame_length must be positive");
    }
    if (hop_length == 0 || hop_length > frame_length) {
        fail("hop_length must be in [1, frame_length]");
    }
    if (!std::has_single_bit(fft_size) || fft_size < frame_length) {
        fail("fft_size must be a power of two >= frame_length");
    }
    if (num_mel_filters == 0) {
        fail("num_mel_filters must be positive");
    }
    if (num_cepstra == 0 || num_cepstra > num_mel_filters) {
        fail("num_cepstra must be in [1, num_mel_filters]");
    }
    if (sample_rate == 0) {
        fail("sample_rate must be positive");
    }
    if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
        fail("need 0 <= fmin < fmax <= sample_rate / 2");
    }
    if (!(log_floor > 0.0)) {
        fail("log_floor must be positive");
    }
}

std::size_t DspConfig::num_frames(std::size_t clip_length) const noexcept
{
    if (clip_length < frame_length) {
        return 0;
    }
    return (clip_length - frame_length) / hop_length + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> frame_signal(std::span<const std::int16_t> samples, const DspConfig& config)
{
    const std::size_t frames = config.num_frames(samples.size());
    if (frames == 0) {
        throw Error(ErrorCode::ClipTooShort, "clip has " + std::to_string(samples.size())
                        + " samples, frame_length is " + std::to_string(config.frame_length));
    }
    std::vector<std::vector<double>> out(frames, std::vector<double>(config.frame_length));
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * config.hop_length;
        for (std::size_t n = 0; n < config.frame_length; ++n) {
            out[f][n] = samples[start + n] / 32768.0;
        }
    }
    return out;
}

namespace {

// The FFTW planner is not thread-safe; plans are created under this lock and
// kept for the life of the process. Executing a plan on other buffers with the
// same (fftw_malloc) alignment is safe from any thread. FFTW_ESTIMATE keeps the
// plan choice independent of timing, so output is reproducible run to run.
fftw_plan r2c_plan(std::size_t size)
{
    static std::mutex mutex;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(size);
    if (it == plans.end()) {
        double* in = fftw_alloc_real(size);
        fftw_complex* out = fftw_alloc_complex(size / 2 + 1);
        const fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), in, out, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        it = plans.emplace(size, plan).first;
    }
    return it->second;
}

} // namespace

RealPowerSpectrum::RealPowerSpectrum(std::size_t fft_size)
    : size_(fft_size)
{
    if (fft_size < 2 || !std::has_single_bit(fft_size)) {
        throw Error(ErrorCode::InvalidConfig, "FFT size must be a power of two >= 2");
    }
    plan_ = r2c_plan(fft_size);
    input_ = fftw_alloc_real(fft_size);
    output_ = reinterpret_cast<double*>(fftw_alloc_complex(fft_size / 2 + 1));
}

RealPowerSpectrum::~RealPowerSpectrum()
{
    fftw_free(input_);
    fftw_free(output_);
}

void RealPowerSpectrum::operator()(std::span<const double> input, std::span<double> out)
{
    const std::size_t bins = size_ / 2 + 1;
    if (input.size() > size_ || out.size() != bins) {
        throw Error(ErrorCode::LengthMismatch, "power spectrum buffers do not match the FFT size");
    }
    std::copy(input.begin(), input.end(), input_);
    std::fill(input_ + input.size(), input_ + size_, 0.0);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), input_, reinterpret_cast<fftw_complex*>(output_));
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = output_[2 * k];
        const double im = output_[2 * k + 1];
        out[k] = re * re + im * im;
    }
}

std::vector<double> hann_window(std::size_t length)
{
    std::vector<double> w(length);
    for (std::size_t n = 0; n < length; ++n) {
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
    }
    return w;
}

std::vector<double> power_spectrum(std::span<const double> frame, const DspConfig& config)
{
    if (frame.size() != config.frame_length) {
        throw Error(ErrorCode::LengthMismatch, "frame has " + std::to_string(frame.size()) + " samples, expected "
                        + std::to_string(config.frame_length));
    }
    config.validate();
    const auto window = hann_window(config.frame_length);
    std::vector<double> windowed(config.frame_length);
    for (std::size_t n = 0; n < windowed.size(); ++n) {
        windowed[n] = frame[n] * window[n];
    }
    RealPowerSpectrum spectrum(config.fft_size);
    std::vector<double> out(config.num_bins());
    spectrum(windowed, out);
    return out;
}

MelFilterbank mel_filterbank(const DspConfig& config)
{
    config.validate();
    const std::size_t filters = config.num_mel_filters;
    const std::size_t bins = config.num_bins();
    const double mel_lo = hz_to_mel(config.fmin);
    const double mel_hi = hz_to_mel(config.fmax);
    const double bin_hz = static_cast<double>(config.sample_rate) / static_cast<double>(config.fft_size);

    // filters + 2 edge points equally spaced in mel.
    std::vector<double> edges(filters + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(filters + 1));
    }

    MelFilterbank fb;
    fb.num_filters = filters;
    fb.num_bins = bins;
    fb.weights.assign(filters * bins, 0.0);
    fb.center_hz.assign(edges.begin() + 1, edges.end() - 1);
    fb.first_bin.assign(filters, 0);
    fb.last_bin.assign(filters, 0);

    for (std::size_t m = 0; m + 1 < filters; ++m) {
        if (std::lround(fb.center_hz[m] / bin_hz) == std::lround(fb.center_hz[m + 1] / bin_hz)) {
            throw Error(ErrorCode::DegenerateFilter, "filters " + std::to_string(m) + " and " + std::to_string(m + 1)
                            + " share center bin " + std::to_string(std::lround(fb.center_hz[m] / bin_hz)));
        }
    }

    for (std::size_t m = 0; m < filters; ++m) {
        const double left = edges[m];
        const double center = edges[m + 1];
        const double right = edges[m + 2];
        std::size_t first = bins;
        std::size_t last = 0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            double w = 0.0;
            if (f > left && f <= center) {
                w = (f - left) / (center - left);
            } else if (f > center && f < right) {
                w = (right - f) / (right - center);
            }
            if (w > 0.0) {
                fb.weights[m * bins + k] = w;
                first = std::min(first, k);
                last = k + 1;
            }
        }
        if (first >= last) {
            throw Error(ErrorCode::DegenerateFilter, "filter " + std::to_string(m) + " covers no FFT bin");
        }
        fb.first_bin[m] = first;
        fb.last_bin[m] = last;
    }
    return fb;
}

namespace {

std::vector<double> dct_basis(std::size_t num_in, std::size_t num_out)
{
    std::vector<double> basis(num_out * num_in);
    const double n = static_cast<double>(num_in);
    for (std::size_t k = 0; k < num_out; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (std::size_t m = 0; m < num_in; ++m) {
            basis[k * num_in + m]
                = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(m) + 1.0) / (2.0 * n));
        }
    }
    return basis;
}

} // namespace

std::vector<double> dct_ii(std::span<const double> input, std::size_t num_out)
{
    const auto basis = dct_basis(input.size(), num_out);
    std::vector<double> out(num_out, 0.0);
    for (std::size_t k = 0; k < num_out; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < input.size(); ++m) {
            acc += basis[k * input.size() + m] * input[m];
        }
        out[k] = acc;
    }
    return out;
}

MfccExtractor::MfccExtractor(const DspConfig& config)
    : config_((config.validate(), config))
    , scaled_window_(hann_window(config.frame_length))
    , filterbank_(mel_filterbank(config))
    , dct_basis_(dct_basis(config.num_mel_filters, config.num_cepstra))
{
    for (double& w : scaled_window_) {
        w /= 32768.0;
    }
}

FeatureMatrix MfccExtractor::operator()(const AudioClip& clip) const
{
    if (clip.sample_rate != config_.sample_rate) {
        throw Error(ErrorCode::InvalidConfig, "clip sample rate " + std::to_string(clip.sample_rate)
                        + " does not match front-end rate " + std::to_string(config_.sample_rate));
    }
    return (*this)(std::span<const std::int16_t>(clip.samples));
}

FeatureMatrix MfccExtractor::operator()(std::span<const std::int16_t> samples) const
{
    const std::size_t frames = config_.num_frames(samples.size());
    if (frames == 0) {
        throw Error(ErrorCode::ClipTooShort, "clip has " + std::to_string(samples.size())
                        + " samples, frame_length is " + std::to_string(config_.frame_length));
    }
    const std::size_t mels = config_.num_mel_filters;
    const std::size_t ceps = config_.num_cepstra;

    FeatureMatrix out;
    out.num_frames = frames;
    out.num_coeffs = ceps;
    out.config = config_;
    out.values.assign(frames * ceps, 0.0);

    RealPowerSpectrum power(config_.fft_size);
    std::vector<double> frame(config_.frame_length);
    std::vector<double> spectrum(config_.num_bins());
    std::vector<double> log_mel(mels);

    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * config_.hop_length;
        for (std::size_t n = 0; n < config_.frame_length; ++n) {
            frame[n] = samples[start + n] * scaled_window_[n];
        }
        power(frame, spectrum);
        for (std::size_t m = 0; m < mels; ++m) {
            double energy = 0.0;
            for (std::size_t k = filterbank_.first_bin[m]; k < filterbank_.last_bin[m]; ++k) {
                energy += filterbank_.at(m, k) * spectrum[k];
            }
            log_mel[m] = std::log(energy + config_.log_floor);
        }
        for (std::size_t c = 0; c < ceps; ++c) {
            double acc = 0.0;
            for (std::size_t m = 0; m < mels; ++m) {
                acc += dct_basis_[c * mels + m] * log_mel[m];
            }
            out.values[f * ceps + c] = acc;
        }
    }
    return out;
}

FeatureMatrix mfcc(const AudioClip& clip, const DspConfig& config) { return MfccExtractor(config)(clip); }

} // namespace advaudio
