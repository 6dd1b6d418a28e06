#include "tgs/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "tgs/error.hpp"

namespace tgs {

namespace {

constexpr char kMagic[4] = {'C', 'I', 'E', 'T'};
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ParseError("tensor container: truncated shape field");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_tensor(std::ostream& out, const TensorData& t) {
    if (t.values.size() != t.element_count())
        throw ValidationError("tensor container: value count does not match shape");
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    out.put(static_cast<char>(t.dtype));
    out.put(static_cast<char>(t.shape.size()));
    for (auto e : t.shape) put_u64_le(out, e);
    if (t.dtype == kTensorDtypeF32) {
        std::vector<float> narrow(t.values.begin(), t.values.end());
        out.write(reinterpret_cast<const char*>(narrow.data()),
                  static_cast<std::streamsize>(narrow.size() * sizeof(float)));
    } else if (t.dtype == kTensorDtypeF64) {
        out.write(reinterpret_cast<const char*>(t.values.data()),
                  static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    } else {
        throw ValidationError("tensor container: unsupported dtype " + std::to_string(t.dtype));
    }
    if (!out) throw IoError("tensor container: write failed");
}

TensorData read_tensor(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("tensor container: bad magic (expected CIET)");
    const int version = in.get();
    if (version != kVersion)
        throw ParseError("tensor container: unsupported version " + std::to_string(version));
    const int dtype = in.get();
    if (dtype != kTensorDtypeF32 && dtype != kTensorDtypeF64)
        throw ParseError("tensor container: unsupported dtype " + std::to_string(dtype));
    const int ndim = in.get();
    if (ndim < 0 || !in) throw ParseError("tensor container: truncated header");

    TensorData t;
    t.dtype = static_cast<std::uint8_t>(dtype);
    t.shape.resize(static_cast<std::size_t>(ndim));
    for (auto& e : t.shape) e = get_u64_le(in);

    const std::uint64_t n = t.element_count();
    t.values.resize(n);
    if (t.dtype == kTensorDtypeF32) {
        std::vector<float> narrow(n);
        in.read(reinterpret_cast<char*>(narrow.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw ParseError("tensor container: truncated float32 payload");
        for (std::uint64_t i = 0; i < n; ++i) t.values[i] = static_cast<double>(narrow[i]);
    } else {
        in.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw ParseError("tensor container: truncated float64 payload");
    }
    return t;
}

TensorData read_tensor_at(const std::string& path, std::uint64_t offset) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor container: " + path);
    in.seekg(static_cast<std::streamoff>(offset));
    if (!in) throw ParseError("tensor container: offset " + std::to_string(offset) +
                              " out of range in " + path);
    return read_tensor(in);
}

Mat tensor_to_matrix(const TensorData& t) {
    if (t.shape.size() != 2)
        throw ValidationError("tensor container: expected rank-2 tensor, got rank " +
                              std::to_string(t.shape.size()));
    Mat m(static_cast<std::size_t>(t.shape[0]), static_cast<std::size_t>(t.shape[1]));
    m.data = t.values;
    return m;
}

} // namespace tgs
