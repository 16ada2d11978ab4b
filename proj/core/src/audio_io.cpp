#include "advaudio/audio_io.hpp"

#include "advaudio/error.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

namespace advaudio {
namespace {

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t le32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8)
        | (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) { out.insert(out.end(), tag.begin(), tag.end()); }

bool tag_is(const std::uint8_t* p, std::string_view tag) { return std::memcmp(p, tag.data(), 4) == 0; }

[[noreturn]] void unsupported(const std::string& field, std::uint32_t got, std::uint32_t want)
{
    throw Error(ErrorCode::UnsupportedFormat,
                field + " is " + std::to_string(got) + ", expected " + std::to_string(want));
}

} // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE")) {
        throw Error(ErrorCode::NotWav, "missing RIFF/WAVE magic");
    }

    bool have_fmt = false;
    std::optional<AudioClip> clip;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::uint32_t chunk_size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (chunk_size > bytes.size() - body) {
            throw Error(ErrorCode::NotWav, "chunk extends past end of file");
        }
        if (tag_is(chunk, "fmt ")) {
            if (chunk_size < 16) {
                throw Error(ErrorCode::NotWav, "fmt chunk too short");
            }
            const std::uint8_t* f = bytes.data() + body;
            const std::uint16_t format = le16(f);
            const std::uint16_t channels = le16(f + 2);
            const std::uint32_t rate = le32(f + 4);
            const std::uint16_t bits = le16(f + 14);
            if (format != 1) {
                unsupported("format", format, 1);
            }
            if (channels != 1) {
                unsupported("channels", channels, 1);
            }
            if (bits != 16) {
                unsupported("bits_per_sample", bits, 16);
            }
            if (rate != kCanonicalSampleRate) {
                unsupported("sample_rate", rate, kCanonicalSampleRate);
            }
            have_fmt = true;
        } else if (tag_is(chunk, "data")) {
            if (!have_fmt) {
                throw Error(ErrorCode::NotWav, "data chunk precedes fmt chunk");
            }
            AudioClip out;
            out.sample_rate = kCanonicalSampleRate;
            out.samples.resize(chunk_size / 2);
            const std::uint8_t* d = bytes.data() + body;
            for (std::size_t i = 0; i < out.samples.size(); ++i) {
                out.samples[i] = static_cast<std::int16_t>(le16(d + 2 * i));
            }
            clip = std::move(out);
            break;
        }
        // RIFF chunks are word aligned.
        pos = body + chunk_size + (chunk_size & 1u);
    }
    if (!have_fmt) {
        throw Error(ErrorCode::NotWav, "no fmt chunk");
    }
    if (!clip) {
        throw Error(ErrorCode::NotWav, "no data chunk");
    }
    return *std::move(clip);
}

AudioClip read_wav(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip)
{
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put32(out, 16);
    put16(out, 1);                            // PCM
    put16(out, 1);                            // mono
    put32(out, clip.sample_rate);
    put32(out, clip.sample_rate * 2);         // byte rate
    put16(out, 2);                            // block align
    put16(out, 16);
    put_tag(out, "data");
    put32(out, data_bytes);
    for (std::int16_t s : clip.samples) {
        put16(out, static_cast<std::uint16_t>(s));
    }
    return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path)
{
    const auto bytes = encode_wav(clip);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

AudioClip pad_or_trim(const AudioClip& clip, std::size_t target_samples)
{
    AudioClip out = clip;
    out.samples.resize(target_samples, 0);
    return out;
}

} // namespace advaudio
