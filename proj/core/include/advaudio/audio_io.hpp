#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advaudio {

inline constexpr std::uint32_t kCanonicalSampleRate = 16000;
inline constexpr std::size_t kCanonicalClipSamples = kCanonicalSampleRate; // one second

/// Mono PCM16 audio. Values are treated as immutable once built; operations
/// return new clips.
struct AudioClip {
    std::vector<std::int16_t> samples;
    std::uint32_t sample_rate = kCanonicalSampleRate;
    std::optional<std::string> label;

    std::size_t size() const noexcept { return samples.size(); }

    friend bool operator==(const AudioClip&, const AudioClip&) = default;
};

/// Decodes a RIFF/WAVE file holding PCM16 mono audio at 16 kHz. Chunks other
/// than "fmt " and "data" are skipped. Throws NotWav or UnsupportedFormat.
AudioClip read_wav(const std::filesystem::path& path);

/// Decodes an in-memory WAV image (same rules as read_wav).
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

/// Canonical 44-byte header + little-endian sample data.
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

void write_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Zero-pads or truncates at the tail so the result has exactly target_samples.
AudioClip pad_or_trim(const AudioClip& clip, std::size_t target_samples);

} // namespace advaudio
