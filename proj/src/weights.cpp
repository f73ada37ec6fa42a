#include "emoxgen/weights.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "emoxgen/errors.hpp"

namespace emoxgen::num {

namespace {

constexpr char kMagic[5] = {'E', 'M', 'O', 'W', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw ParseError("EMOW1: truncated file while reading u32");
    }
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

float get_f32(std::istream& is) {
    uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void save_weights(const std::string& path, const std::map<std::string, Tensor<float>>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os.write(kMagic, 5);
    for (const auto& [name, tensor] : params) {
        put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(0));  // dtype f32
        os.put(static_cast<char>(tensor.shape().size()));
        for (size_t d : tensor.shape()) put_u32(os, static_cast<uint32_t>(d));
        for (float v : tensor.values()) put_f32(os, v);
    }
    if (!os) throw DataError("failed writing '" + path + "'");
}

std::map<std::string, Tensor<float>> load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0) {
        throw ParseError("'" + path + "' is not an EMOW1 weight file");
    }
    std::map<std::string, Tensor<float>> out;
    while (is.peek() != std::ifstream::traits_type::eof()) {
        const uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw ParseError("EMOW1: truncated entry name");
        const int dtype = is.get();
        if (dtype != 0) {
            throw ParseError("EMOW1: unsupported dtype tag " + std::to_string(dtype) + " for '" +
                             name + "'");
        }
        const int ndim = is.get();
        if (ndim <= 0) throw ParseError("EMOW1: bad ndim for '" + name + "'");
        Shape shape(static_cast<size_t>(ndim));
        for (auto& d : shape) d = get_u32(is);
        std::vector<float> values(shape_numel(shape));
        for (auto& v : values) v = get_f32(is);
        if (out.count(name)) throw ParseError("EMOW1: duplicate entry '" + name + "'");
        out.emplace(name, Tensor<float>::from(std::move(shape), std::move(values)));
    }
    return out;
}

}  // namespace emoxgen::num
