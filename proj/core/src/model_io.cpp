#include "advaudio/error.hpp"
#include "advaudio/victim_model.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace advaudio {
namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'K', 'W', 'S', 'M', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u32(std::uint32_t v)
    {
        for (int s = 0; s < 32; s += 8) {
            bytes.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }
    void u64(std::uint64_t v)
    {
        for (int s = 0; s < 64; s += 8) {
            bytes.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void size(std::size_t v) { u32(static_cast<std::uint32_t>(v)); }
    void str(const std::string& s)
    {
        size(s.size());
        bytes.insert(bytes.end(), s.begin(), s.end());
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64()
    {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t size() { return u32(); }
    std::string str()
    {
        const std::size_t n = size();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const
    {
        if (n > data_.size() - pos_) {
            throw Error(ErrorCode::CorruptModel, "model file is truncated");
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes)
{
    return static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

} // namespace

std::vector<std::uint8_t> serialize_model(const VictimModel& model)
{
    Writer w;
    w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
    w.u32(kVersion);

    w.size(model.labels().size());
    for (const auto& name : model.labels().names()) {
        w.str(name);
    }

    const DspConfig& d = model.dsp_config();
    w.size(d.frame_length);
    w.size(d.hop_length);
    w.size(d.fft_size);
    w.size(d.num_mel_filters);
    w.size(d.num_cepstra);
    w.u32(d.sample_rate);
    w.f64(d.fmin);
    w.f64(d.fmax);
    w.f64(d.log_floor);

    const Network& net = model.network();
    const Architecture& a = net.architecture();
    for (std::size_t v : {a.input_rows, a.input_cols, a.conv_filters, a.kernel_rows, a.kernel_cols, a.pool, a.hidden,
                          a.num_classes}) {
        w.size(v);
    }
    for (double v : net.input_mean()) {
        w.f32(v);
    }
    for (double v : net.input_scale()) {
        w.f32(v);
    }

    w.size(net.params().size());
    for (const Tensor& t : net.params()) {
        w.str(t.name);
        w.size(t.shape.size());
        for (std::size_t dim : t.shape) {
            w.size(dim);
        }
        for (double v : t.data) {
            w.f32(v);
        }
    }
    w.u32(checksum(w.bytes));
    return std::move(w.bytes);
}

VictimModel deserialize_model(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < sizeof(kMagic) + 8) {
        throw Error(ErrorCode::CorruptModel, "model file is truncated");
    }
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorCode::CorruptModel, "bad magic");
    }
    const auto body = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4));
    if (tail.u32() != checksum(body)) {
        throw Error(ErrorCode::CorruptModel, "checksum mismatch");
    }

    Reader r(body.subspan(sizeof(kMagic)));
    if (const auto version = r.u32(); version != kVersion) {
        throw Error(ErrorCode::CorruptModel, "unsupported format version " + std::to_string(version));
    }

    std::vector<std::string> names(r.size());
    for (auto& n : names) {
        n = r.str();
    }

    DspConfig d;
    d.frame_length = r.size();
    d.hop_length = r.size();
    d.fft_size = r.size();
    d.num_mel_filters = r.size();
    d.num_cepstra = r.size();
    d.sample_rate = r.u32();
    d.fmin = r.f64();
    d.fmax = r.f64();
    d.log_floor = r.f64();

    Architecture a;
    a.input_rows = r.size();
    a.input_cols = r.size();
    a.conv_filters = r.size();
    a.kernel_rows = r.size();
    a.kernel_cols = r.size();
    a.pool = r.size();
    a.hidden = r.size();
    a.num_classes = r.size();

    Network net(a);
    for (double& v : net.input_mean()) {
        v = r.f32();
    }
    for (double& v : net.input_scale()) {
        v = r.f32();
    }

    const std::size_t tensors = r.size();
    if (tensors != net.params().size()) {
        throw Error(ErrorCode::ModelShapeMismatch, "model file has " + std::to_string(tensors) + " tensors, expected "
                        + std::to_string(net.params().size()));
    }
    for (Tensor& t : net.params()) {
        const std::string name = r.str();
        std::vector<std::size_t> shape(r.size());
        for (auto& dim : shape) {
            dim = r.size();
        }
        if (name != t.name || shape != t.shape) {
            throw Error(ErrorCode::ModelShapeMismatch, "tensor '" + name + "' does not match the architecture");
        }
        for (double& v : t.data) {
            v = r.f32();
        }
    }
    if (!r.done()) {
        throw Error(ErrorCode::CorruptModel, "trailing bytes after the last tensor");
    }
    return VictimModel(LabelSet(std::move(names)), d, std::move(net));
}

void save_model(const VictimModel& model, const std::filesystem::path& path)
{
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

VictimModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open model file " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace advaudio
