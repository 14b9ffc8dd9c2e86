#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mrir/common.hpp"

namespace mrir {

// Real-valued grayscale slice/patch, row-major. The whole pipeline trades in
// these; restored/normalized images live in [0,1].
template <typename T>
struct Image {
    std::size_t h = 0;
    std::size_t w = 0;
    std::vector<T> v;

    Image() = default;
    Image(std::size_t height, std::size_t width, T fill = T(0))
        : h(height), w(width), v(height * width, fill) {}

    T& at(std::size_t r, std::size_t c) { return v[r * w + c]; }
    const T& at(std::size_t r, std::size_t c) const { return v[r * w + c]; }
    std::size_t size() const { return v.size(); }

    bool same_dims(const Image& o) const { return h == o.h && w == o.w; }

    template <typename U>
    Image<U> cast() const {
        Image<U> out(h, w);
        for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

using Image2D = Image<double>;

template <typename T>
bool all_finite(const Image<T>& img) {
    for (T x : img.v)
        if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
}

// Affine rescale to [0,1]; a constant image maps to all zeros.
template <typename T>
Image<T> normalize_unit(const Image<T>& img) {
    if (!all_finite(img)) throw invalid_image_error("normalize_unit: non-finite input");
    if (img.v.empty()) return img;
    T lo = img.v[0], hi = img.v[0];
    for (T x : img.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    Image<T> out(img.h, img.w);
    if (lo == hi) return out;  // degenerate range -> zeros
    const T range = hi - lo;
    for (std::size_t i = 0; i < img.v.size(); ++i) out.v[i] = (img.v[i] - lo) / range;
    return out;
}

template <typename T>
Image<T> clamp01(Image<T> img) {
    for (T& x : img.v) x = std::clamp(x, T(0), T(1));
    return img;
}

// ---------------------------------------------------------------------------
// Raw "MRIR" container: magic 4D 52 49 52, u32le width, u32le height,
// u8 dtype (0 = float32le, 1 = float64le), row-major payload.

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

namespace detail {

inline void put_u32le(std::string& s, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

template <typename T>
void append_scalar_le(std::string& s, T x) {
    static_assert(std::numeric_limits<T>::is_iec559);
    char buf[sizeof(T)];
    std::memcpy(buf, &x, sizeof(T));
    // this codebase targets little-endian hosts only
    s.append(buf, sizeof(T));
}

template <typename T>
T read_scalar_le(const char* p) {
    T x;
    std::memcpy(&x, p, sizeof(T));
    return x;
}

}  // namespace detail

template <typename T>
void write_image(const Image<T>& img, const std::filesystem::path& path,
                 DType dtype = DType::f32) {
    std::string bytes;
    bytes.reserve(13 + img.size() * (dtype == DType::f32 ? 4 : 8));
    bytes += "MRIR";
    detail::put_u32le(bytes, static_cast<std::uint32_t>(img.w));
    detail::put_u32le(bytes, static_cast<std::uint32_t>(img.h));
    bytes.push_back(static_cast<char>(dtype));
    for (T x : img.v) {
        if (dtype == DType::f32)
            detail::append_scalar_le(bytes, static_cast<float>(x));
        else
            detail::append_scalar_le(bytes, static_cast<double>(x));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for write: " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error("short write: " + path.string());
}

template <typename T = double>
Image<T> read_image(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for read: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (bytes.size() < 4 || bytes.compare(0, 4, "MRIR") != 0)
        throw format_error("bad magic in " + path.string(), 0);
    if (bytes.size() < 13) throw format_error("truncated header in " + path.string(), bytes.size());

    auto u32 = [&](std::size_t off) {
        std::uint32_t x = 0;
        for (int i = 3; i >= 0; --i)
            x = (x << 8) | static_cast<std::uint8_t>(bytes[off + static_cast<std::size_t>(i)]);
        return x;
    };
    const std::uint32_t w = u32(4);
    const std::uint32_t hgt = u32(8);
    const std::uint8_t tag = static_cast<std::uint8_t>(bytes[12]);
    if (tag > 1) throw format_error("unknown dtype tag in " + path.string(), 12);
    const std::size_t elem = tag == 0 ? 4 : 8;
    const std::size_t need = 13 + static_cast<std::size_t>(w) * hgt * elem;
    if (bytes.size() < need)
        throw format_error("truncated payload in " + path.string(), bytes.size());

    Image<T> img(hgt, w);
    const char* p = bytes.data() + 13;
    for (std::size_t i = 0; i < img.size(); ++i, p += elem) {
        img.v[i] = tag == 0 ? static_cast<T>(detail::read_scalar_le<float>(p))
                            : static_cast<T>(detail::read_scalar_le<double>(p));
    }
    return img;
}

// 16-bit PGM export for visual inspection (quantized, lossy).
template <typename T>
void write_pgm16(const Image<T>& img, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for write: " + path.string());
    f << "P5\n" << img.w << " " << img.h << "\n65535\n";
    for (T x : img.v) {
        const double c = std::clamp(static_cast<double>(x), 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(c * 65535.0));
        // PGM stores the most significant byte first
        f.put(static_cast<char>(q >> 8));
        f.put(static_cast<char>(q & 0xff));
    }
    if (!f) throw io_error("short write: " + path.string());
}

}  // namespace mrir
