#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "latentclean/errors.hpp"
#include "latentclean/layers.hpp"
#include "latentclean/tensor.hpp"

namespace latentclean {

// Self-describing binary container for a ParameterSet.
//
//   magic  "LJT1"
//   u32    entry count
//   entry: u32 name length, name bytes,
//          weights: u32 ndim, u64 dims..., f32 data
//          bias:    u32 ndim, u64 dims..., f32 data
//
// All integers and floats little-endian.

namespace detail {

static_assert(sizeof(float) == 4, "float must be 32-bit");

inline void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw TruncationError("parameter container ended inside a header field");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw TruncationError("parameter container ended inside a header field");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_tensor(std::ostream& out, const Tensor& t) {
    put_u32(out, static_cast<uint32_t>(t.ndim()));
    for (size_t d : t.shape) put_u64(out, d);
    // Host is little-endian on every supported target; bytes go out as stored.
    out.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * 4));
}

inline Tensor get_tensor(std::istream& in) {
    uint32_t ndim = get_u32(in);
    if (ndim > 8) throw FormatError("parameter tensor rank is implausible");
    std::vector<size_t> shape(ndim);
    size_t total = 1;
    for (auto& d : shape) {
        d = static_cast<size_t>(get_u64(in));
        total *= d;
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(total * 4));
    if (!in) throw TruncationError("parameter container ended inside tensor data");
    return t;
}

} // namespace detail

inline constexpr char kParamsMagic[4] = {'L', 'J', 'T', '1'};

inline void save_parameter_set(std::ostream& out, const ParameterSet& ps) {
    out.write(kParamsMagic, 4);
    detail::put_u32(out, static_cast<uint32_t>(ps.entries.size()));
    for (const auto& e : ps.entries) {
        detail::put_u32(out, static_cast<uint32_t>(e.id.size()));
        out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
        detail::put_tensor(out, e.weights);
        detail::put_tensor(out, e.bias);
    }
    if (!out) throw IoError("parameter container write failed");
}

inline ParameterSet load_parameter_set(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kParamsMagic, 4) != 0) {
        throw FormatError("not a parameter container (bad magic)");
    }
    uint32_t count = detail::get_u32(in);
    ParameterSet ps;
    ps.entries.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t len = detail::get_u32(in);
        if (len > 4096) throw FormatError("parameter name length is implausible");
        std::string id(len, '\0');
        in.read(id.data(), len);
        if (!in) throw TruncationError("parameter container ended inside a name");
        Tensor w = detail::get_tensor(in);
        Tensor b = detail::get_tensor(in);
        ps.entries.push_back({std::move(id), std::move(w), std::move(b)});
    }
    return ps;
}

inline void save_parameter_set(const std::string& path, const ParameterSet& ps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    save_parameter_set(out, ps);
}

inline ParameterSet load_parameter_set_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return load_parameter_set(in);
}

} // namespace latentclean
