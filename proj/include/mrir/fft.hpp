#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mrir/common.hpp"

namespace mrir::fft {

// Self-contained complex FFT: iterative radix-2 for power-of-two lengths and
// Bluestein's chirp-z for everything else. Unnormalized; callers apply their
// own scaling. Plans are cached per (type, length); execution only reads
// plan data, so concurrent transforms are safe once the plan exists.

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

template <typename T>
struct Pow2Plan {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<std::complex<T>> tw;  // tw[k] = exp(-2*pi*i*k/n), k < n/2

    explicit Pow2Plan(std::size_t len) : n(len), bitrev(len) {
        std::size_t log2n = 0;
        while ((std::size_t(1) << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (log2n - 1 - b);
            bitrev[i] = r;
        }
        tw.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -6.283185307179586476925287 * double(k) / double(n);
            tw[k] = std::complex<T>(T(std::cos(ang)), T(std::sin(ang)));
        }
    }

    void run(std::complex<T>* a, bool inverse) const {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = bitrev[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t base = 0; base < n; base += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    std::complex<T> w = tw[k * step];
                    if (inverse) w = std::conj(w);
                    const std::complex<T> u = a[base + k];
                    const std::complex<T> t = w * a[base + k + half];
                    a[base + k] = u + t;
                    a[base + k + half] = u - t;
                }
            }
        }
    }
};

template <typename T>
struct BluesteinPlan {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::complex<T>> chirp;  // exp(-i*pi*k^2/n)
    std::vector<std::complex<T>> bfft;   // FFT_m of the chirp filter
    std::shared_ptr<const Pow2Plan<T>> p2;

    BluesteinPlan(std::size_t len, std::shared_ptr<const Pow2Plan<T>> plan_m)
        : n(len), m(plan_m->n), p2(std::move(plan_m)) {
        chirp.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the phase argument small and exact
            const std::uint64_t k2 = (std::uint64_t(k) * k) % (2 * std::uint64_t(n));
            const double ang = -3.141592653589793238463 * double(k2) / double(n);
            chirp[k] = std::complex<T>(T(std::cos(ang)), T(std::sin(ang)));
        }
        std::vector<std::complex<T>> b(m, std::complex<T>(0));
        for (std::size_t k = 0; k < n; ++k) {
            const std::complex<T> c = std::conj(chirp[k]);
            b[k] = c;
            if (k != 0) b[m - k] = c;
        }
        p2->run(b.data(), false);
        bfft = std::move(b);
    }

    void run_forward(std::complex<T>* a) const {
        std::vector<std::complex<T>> u(m, std::complex<T>(0));
        for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
        p2->run(u.data(), false);
        for (std::size_t k = 0; k < m; ++k) u[k] *= bfft[k];
        p2->run(u.data(), true);
        const T inv_m = T(1) / T(m);
        for (std::size_t k = 0; k < n; ++k) a[k] = chirp[k] * u[k] * inv_m;
    }
};

template <typename T>
std::shared_ptr<const Pow2Plan<T>> pow2_plan_ptr(std::size_t n) {
    static std::map<std::size_t, std::shared_ptr<const Pow2Plan<T>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_shared<const Pow2Plan<T>>(n)).first;
    return it->second;
}

template <typename T>
const Pow2Plan<T>& pow2_plan(std::size_t n) {
    return *pow2_plan_ptr<T>(n);
}

template <typename T>
const BluesteinPlan<T>& bluestein_plan(std::size_t n) {
    static std::map<std::size_t, std::shared_ptr<const BluesteinPlan<T>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto p2 = pow2_plan_ptr<T>(next_pow2(2 * n - 1));
        it = cache.emplace(n, std::make_shared<const BluesteinPlan<T>>(n, std::move(p2))).first;
    }
    return *it->second;
}

}  // namespace detail

// In-place unnormalized DFT of length n (inverse = conjugate transform,
// still unnormalized).
template <typename T>
void transform(std::complex<T>* data, std::size_t n, bool inverse) {
    if (n == 0) throw dimension_error("fft: zero length");
    if (n == 1) return;
    if (detail::is_pow2(n)) {
        detail::pow2_plan<T>(n).run(data, inverse);
        return;
    }
    const auto& plan = detail::bluestein_plan<T>(n);
    if (!inverse) {
        plan.run_forward(data);
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
        plan.run_forward(data);
        for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
    }
}

// Unnormalized 2D DFT over a row-major h x w buffer.
template <typename T>
void transform_2d(std::complex<T>* data, std::size_t h, std::size_t w, bool inverse) {
    for (std::size_t r = 0; r < h; ++r) transform(data + r * w, w, inverse);
    std::vector<std::complex<T>> col(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = data[r * w + c];
        transform(col.data(), h, inverse);
        for (std::size_t r = 0; r < h; ++r) data[r * w + c] = col[r];
    }
}

}  // namespace mrir::fft
