#include "advaudio/dsp.hpp"
#include "advaudio/rng.hpp"

#include "../support/oracles.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace advaudio;
using advaudio::testing::brute_force_power;
using advaudio::testing::inverse_dct_ii;

namespace {

std::vector<double> random_frame(Rng& rng, std::size_t n)
{
    std::vector<double> f(n);
    for (auto& v : f) {
        v = rng.uniform(-1.0, 1.0);
    }
    return f;
}

double relative_error(const std::vector<double>& got, const std::vector<double>& want)
{
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        err = std::max(err, std::abs(got[i] - want[i]));
        scale = std::max(scale, std::abs(want[i]));
    }
    return err / scale;
}

} // namespace

TEST(Dsp, FrameCountForOneSecond)
{
    DspConfig config;
    EXPECT_EQ(config.num_frames(16000), 98u);
    EXPECT_EQ(config.num_frames(480), 1u);
    EXPECT_EQ(config.num_frames(479), 0u);
    std::vector<std::int16_t> samples(16000, 0);
    EXPECT_EQ(frame_signal(samples, config).size(), 98u);
}

TEST(Dsp, FrameSignalScalesAndOffsets)
{
    DspConfig config;
    std::vector<std::int16_t> samples(1000);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<std::int16_t>(i);
    }
    const auto frames = frame_signal(samples, config);
    ASSERT_EQ(frames.size(), 4u);
    EXPECT_DOUBLE_EQ(frames[2][0], 320.0 / 32768.0);
    EXPECT_DOUBLE_EQ(frames[3][479], 959.0 / 32768.0);
}

TEST(Dsp, ShortClipThrows)
{
    std::vector<std::int16_t> samples(100, 0);
    EXPECT_ERROR_CODE(frame_signal(samples, DspConfig{}), ErrorCode::ClipTooShort);
}

TEST(Dsp, PowerSpectrumMatchesBruteForceDft)
{
    DspConfig config;
    Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto frame = random_frame(rng, config.frame_length);
        worst = std::max(worst, relative_error(power_spectrum(frame, config), brute_force_power(frame, config.fft_size)));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Dsp, PowerSpectrumMatchesBruteForceWithoutPadding)
{
    DspConfig config;
    config.frame_length = 256;
    config.fft_size = 256;
    config.num_mel_filters = 20;
    Rng rng(12);
    const auto frame = random_frame(rng, 256);
    EXPECT_LE(relative_error(power_spectrum(frame, config), brute_force_power(frame, 256)), 1e-6);
}

TEST(Dsp, SinusoidAtBinPeaksAtThatBin)
{
    DspConfig config;
    config.frame_length = 512;
    for (std::size_t k : {5u, 40u, 100u, 200u}) {
        std::vector<double> frame(512);
        for (std::size_t n = 0; n < frame.size(); ++n) {
            frame[n] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k * n) / 512.0);
        }
        const auto power = power_spectrum(frame, config);
        const auto peak = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
        EXPECT_EQ(peak, k);
        const auto oracle = brute_force_power(frame, 512);
        EXPECT_EQ(static_cast<std::size_t>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin()), k);
    }
}

TEST(Dsp, ParsevalHolds)
{
    DspConfig config;
    Rng rng(13);
    const auto frame = random_frame(rng, config.frame_length);
    const auto power = power_spectrum(frame, config);
    // Full spectrum = bins 0 and N/2 once, the rest twice.
    double spectral = power.front() + power.back();
    for (std::size_t k = 1; k + 1 < power.size(); ++k) {
        spectral += 2.0 * power[k];
    }
    double time = 0.0;
    const double pi = std::numbers::pi;
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(n) / static_cast<double>(frame.size())));
        time += frame[n] * frame[n] * w * w;
    }
    EXPECT_NEAR(spectral / (static_cast<double>(config.fft_size) * time), 1.0, 1e-12);
}

TEST(Dsp, WrongFrameLengthThrows)
{
    std::vector<double> frame(100, 0.0);
    EXPECT_ERROR_CODE(power_spectrum(frame, DspConfig{}), ErrorCode::LengthMismatch);
}

TEST(Dsp, MelOf700Hz)
{
    EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
    EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
    EXPECT_DOUBLE_EQ(hz_to_mel(0.0), 0.0);
    for (double hz : {20.0, 440.0, 1000.0, 7600.0}) {
        EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9 * hz);
    }
}

TEST(Dsp, FilterbankShape)
{
    DspConfig config;
    const MelFilterbank fb = mel_filterbank(config);
    ASSERT_EQ(fb.num_filters, 40u);
    ASSERT_EQ(fb.num_bins, 257u);
    for (std::size_t m = 0; m < fb.num_filters; ++m) {
        double peak = 0.0;
        for (std::size_t k = 0; k < fb.num_bins; ++k) {
            const double w = fb.at(m, k);
            ASSERT_GE(w, 0.0);
            ASSERT_LE(w, 1.0);
            if (k < fb.first_bin[m] || k >= fb.last_bin[m]) {
                ASSERT_EQ(w, 0.0);
            }
            peak = std::max(peak, w);
        }
        EXPECT_GT(peak, 0.4) << "filter " << m;
        if (m > 0) {
            EXPECT_GT(fb.center_hz[m], fb.center_hz[m - 1]);
        }
    }
    EXPECT_GT(fb.center_hz.front(), config.fmin);
    EXPECT_LT(fb.center_hz.back(), config.fmax);
}

TEST(Dsp, TooManyFiltersForFftIsDegenerate)
{
    DspConfig config;
    config.frame_length = 64;
    config.hop_length = 32;
    config.fft_size = 64;
    config.num_mel_filters = 40;
    EXPECT_ERROR_CODE(mel_filterbank(config), ErrorCode::DegenerateFilter);
}

TEST(Dsp, InvalidConfigRejected)
{
    DspConfig config;
    config.fft_size = 500;
    EXPECT_ERROR_CODE(config.validate(), ErrorCode::InvalidConfig);
    config = DspConfig{};
    config.frame_length = 1024;
    EXPECT_ERROR_CODE(config.validate(), ErrorCode::InvalidConfig);
    config = DspConfig{};
    config.num_cepstra = 41;
    EXPECT_ERROR_CODE(config.validate(), ErrorCode::InvalidConfig);
    config = DspConfig{};
    config.fmax = 9000.0;
    EXPECT_ERROR_CODE(config.validate(), ErrorCode::InvalidConfig);
}

TEST(Dsp, DctRoundTrip)
{
    Rng rng(14);
    double worst = 0.0;
    for (std::size_t n : {1u, 2u, 7u, 40u, 64u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto x = random_frame(rng, n);
            const auto back = inverse_dct_ii(dct_ii(x, n));
            for (std::size_t i = 0; i < n; ++i) {
                worst = std::max(worst, std::abs(back[i] - x[i]));
            }
        }
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Dsp, DctOfConstantIsDcOnly)
{
    const std::vector<double> x(16, 2.0);
    const auto c = dct_ii(x, 16);
    EXPECT_NEAR(c[0], 2.0 * std::sqrt(16.0), 1e-12);
    for (std::size_t k = 1; k < 16; ++k) {
        EXPECT_NEAR(c[k], 0.0, 1e-12);
    }
}

TEST(Dsp, MfccShapeAndDeterminism)
{
    Rng rng(15);
    AudioClip clip;
    clip.samples.resize(16000);
    for (auto& s : clip.samples) {
        s = static_cast<std::int16_t>(rng.uniform_int(-3000, 3000));
    }
    const DspConfig config;
    const FeatureMatrix a = mfcc(clip, config);
    EXPECT_EQ(a.num_frames, 98u);
    EXPECT_EQ(a.num_coeffs, 10u);
    EXPECT_EQ(a.values.size(), 980u);
    const MfccExtractor extractor(config);
    EXPECT_EQ(extractor(clip).values, a.values);
    for (double v : a.values) {
        ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(Dsp, MfccMatchesReferencePipeline)
{
    // Rebuild the first frame's coefficients from the oracle spectrum and the
    // filterbank weights.
    Rng rng(16);
    AudioClip clip;
    clip.samples.resize(16000);
    for (auto& s : clip.samples) {
        s = static_cast<std::int16_t>(rng.uniform_int(-3000, 3000));
    }
    const DspConfig config;
    const FeatureMatrix features = mfcc(clip, config);
    const MelFilterbank fb = mel_filterbank(config);
    for (std::size_t frame : {0u, 57u, 97u}) {
        std::vector<double> x(config.frame_length);
        for (std::size_t n = 0; n < x.size(); ++n) {
            x[n] = clip.samples[frame * config.hop_length + n] / 32768.0;
        }
        const auto power = brute_force_power(x, config.fft_size);
        std::vector<double> log_mel(fb.num_filters);
        for (std::size_t m = 0; m < fb.num_filters; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < fb.num_bins; ++k) {
                e += fb.at(m, k) * power[k];
            }
            log_mel[m] = std::log(e + config.log_floor);
        }
        const double n = static_cast<double>(fb.num_filters);
        for (std::size_t c = 0; c < config.num_cepstra; ++c) {
            double acc = 0.0;
            for (std::size_t m = 0; m < fb.num_filters; ++m) {
                acc += log_mel[m] * std::cos(std::numbers::pi * c * (2.0 * m + 1.0) / (2.0 * n));
            }
            acc *= std::sqrt((c == 0 ? 1.0 : 2.0) / n);
            EXPECT_NEAR(features.at(frame, c), acc, 1e-6 * std::max(1.0, std::abs(acc)));
        }
    }
}

TEST(Dsp, SilenceHitsLogFloor)
{
    AudioClip clip;
    clip.samples.assign(16000, 0);
    const FeatureMatrix f = mfcc(clip, DspConfig{});
    EXPECT_NEAR(f.at(0, 0), std::log(1e-6) * std::sqrt(40.0), 1e-9);
    EXPECT_NEAR(f.at(0, 1), 0.0, 1e-9);
}

TEST(Dsp, ExtractorRejectsOtherRates)
{
    AudioClip clip;
    clip.samples.assign(16000, 0);
    clip.sample_rate = 8000;
    EXPECT_ERROR_CODE(mfcc(clip, DspConfig{}), ErrorCode::InvalidConfig);
}
