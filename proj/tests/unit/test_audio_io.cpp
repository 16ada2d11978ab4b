#include "advaudio/audio_io.hpp"
#include "advaudio/rng.hpp"

#include "test_support.hpp"

#include <fstream>
#include <iterator>

using namespace advaudio;

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v)
{
    b.push_back(v & 0xFF);
    b.push_back(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v)
{
    for (int s = 0; s < 32; s += 8) {
        b.push_back((v >> s) & 0xFF);
    }
}

void put_tag(std::vector<std::uint8_t>& b, const char* tag)
{
    b.insert(b.end(), tag, tag + 4);
}

// Header assembled field by field from the RIFF layout.
std::vector<std::uint8_t> hand_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                   std::uint16_t bits, const std::vector<std::uint8_t>& data)
{
    std::vector<std::uint8_t> b;
    put_tag(b, "RIFF");
    put_u32(b, 36 + static_cast<std::uint32_t>(data.size()));
    put_tag(b, "WAVE");
    put_tag(b, "fmt ");
    put_u32(b, 16);
    put_u16(b, format);
    put_u16(b, channels);
    put_u32(b, rate);
    put_u32(b, rate * channels * bits / 8);
    put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
    put_u16(b, bits);
    put_tag(b, "data");
    put_u32(b, static_cast<std::uint32_t>(data.size()));
    b.insert(b.end(), data.begin(), data.end());
    return b;
}

const std::vector<std::uint8_t> kThreeSamples = {0x00, 0x00, 0x01, 0x00, 0xFF, 0xFF}; // 0, 1, -1

std::string error_message(const std::vector<std::uint8_t>& bytes)
{
    try {
        decode_wav(bytes);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(AudioIo, DecodesHandBuiltMinimalWav)
{
    const auto bytes = hand_wav(1, 1, 16000, 16, kThreeSamples);
    ASSERT_EQ(bytes.size(), 50u);
    const AudioClip clip = decode_wav(bytes);
    EXPECT_EQ(clip.samples, (std::vector<std::int16_t>{0, 1, -1}));
    EXPECT_EQ(clip.sample_rate, 16000u);
    EXPECT_FALSE(clip.label);
}

TEST(AudioIo, EncodeMatchesHandBuiltHeader)
{
    AudioClip clip;
    clip.samples = {0, 1, -1};
    EXPECT_EQ(encode_wav(clip), hand_wav(1, 1, 16000, 16, kThreeSamples));
}

TEST(AudioIo, DataChunkSizeIsTwiceSampleCount)
{
    AudioClip clip;
    clip.samples.assign(1234, 7);
    const auto bytes = encode_wav(clip);
    const std::uint32_t data_size = bytes[40] | (bytes[41] << 8) | (bytes[42] << 16) | (bytes[43] << 24);
    EXPECT_EQ(data_size, 2u * 1234u);
    EXPECT_EQ(bytes.size(), 44u + 2u * 1234u);
}

TEST(AudioIo, SkipsUnknownChunksWithPadding)
{
    auto bytes = hand_wav(1, 1, 16000, 16, kThreeSamples);
    // Odd-sized LIST chunk (3 bytes + pad byte) between fmt and data.
    std::vector<std::uint8_t> extra;
    put_tag(extra, "LIST");
    put_u32(extra, 3);
    extra.insert(extra.end(), {'a', 'b', 'c', 0});
    bytes.insert(bytes.begin() + 36, extra.begin(), extra.end());
    const std::uint32_t riff = 36 + 6 + static_cast<std::uint32_t>(extra.size());
    for (int i = 0; i < 4; ++i) {
        bytes[4 + i] = (riff >> (8 * i)) & 0xFF;
    }
    EXPECT_EQ(decode_wav(bytes).samples, (std::vector<std::int16_t>{0, 1, -1}));
}

TEST(AudioIo, RejectsNonRiff)
{
    auto bytes = hand_wav(1, 1, 16000, 16, kThreeSamples);
    bytes[0] = 'X';
    EXPECT_ERROR_CODE(decode_wav(bytes), ErrorCode::NotWav);
    bytes = hand_wav(1, 1, 16000, 16, kThreeSamples);
    bytes[8] = 'X';
    EXPECT_ERROR_CODE(decode_wav(bytes), ErrorCode::NotWav);
    EXPECT_ERROR_CODE(decode_wav(std::vector<std::uint8_t>{'R', 'I'}), ErrorCode::NotWav);
}

TEST(AudioIo, UnsupportedFormatNamesTheField)
{
    const std::vector<std::uint8_t> stereo_data(12, 0);
    EXPECT_ERROR_CODE(decode_wav(hand_wav(1, 2, 16000, 16, stereo_data)), ErrorCode::UnsupportedFormat);
    EXPECT_NE(error_message(hand_wav(1, 2, 16000, 16, stereo_data)).find("channels"), std::string::npos);
    EXPECT_NE(error_message(hand_wav(3, 1, 16000, 16, kThreeSamples)).find("format"), std::string::npos);
    EXPECT_NE(error_message(hand_wav(1, 1, 16000, 8, kThreeSamples)).find("bits_per_sample"), std::string::npos);
    EXPECT_NE(error_message(hand_wav(1, 1, 44100, 16, kThreeSamples)).find("sample_rate"), std::string::npos);
}

TEST(AudioIo, RandomRoundTripThroughFile)
{
    advaudio::testing::TempDir dir;
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        AudioClip clip;
        clip.samples.resize(rng.uniform_below(3000) + 1);
        for (auto& s : clip.samples) {
            s = static_cast<std::int16_t>(rng.uniform_int(-32768, 32767));
        }
        const auto path = dir / "clip.wav";
        write_wav(clip, path);
        EXPECT_EQ(read_wav(path), clip);
    }
}

TEST(AudioIo, RepeatedWritesAreByteIdentical)
{
    advaudio::testing::TempDir dir;
    AudioClip clip;
    clip.samples = {1, -2, 300, -32768, 32767};
    write_wav(clip, dir / "a.wav");
    write_wav(clip, dir / "b.wav");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::vector<char>(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_EQ(slurp(dir / "a.wav"), slurp(dir / "b.wav"));
}

TEST(AudioIo, MissingFileIsIoError)
{
    EXPECT_ERROR_CODE(read_wav("/nonexistent/clip.wav"), ErrorCode::IoError);
}

TEST(AudioIo, PadOrTrim)
{
    AudioClip clip;
    clip.samples.assign(15000, 9);
    auto padded = pad_or_trim(clip, 16000);
    ASSERT_EQ(padded.size(), 16000u);
    EXPECT_EQ(padded.samples[14999], 9);
    for (std::size_t i = 15000; i < 16000; ++i) {
        ASSERT_EQ(padded.samples[i], 0);
    }

    clip.samples.assign(16000, 3);
    EXPECT_EQ(pad_or_trim(clip, 16000), clip);

    clip.samples.resize(17000);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        clip.samples[i] = static_cast<std::int16_t>(i % 1000);
    }
    const auto trimmed = pad_or_trim(clip, 16000);
    EXPECT_TRUE(std::equal(trimmed.samples.begin(), trimmed.samples.end(), clip.samples.begin()));
    EXPECT_EQ(trimmed.size(), 16000u);
}
