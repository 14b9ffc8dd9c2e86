#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/image.hpp"
#include "mrir/kspace.hpp"

namespace mrir {

// ---------------------------------------------------------------------------
// Composite-objective configuration. Weights apply to the raw per-term values;
// the flags switch the k-space and gradient-map terms to their enhanced
// ("+") variants. charbonnier_eps = 0 degrades the Charbonnier term to plain
// pixel-wise L1, which is how the R1 preset is realized.
struct LossWeights {
    double w_charbonnier = 1.0;
    double w_ssim = 0.1;
    double w_kspace = 0.05;
    double w_grad = 0.1;
    bool kspace_masked = false;
    bool grad_amplified = false;
    double charbonnier_eps = 1e-3;
    double grad_a = 2.5;
    double mask_sigma = 32.0;  // defined at 256^2; rescaled with spectrum size
};

inline void validate(const LossWeights& w) {
    if (w.w_charbonnier < 0 || w.w_ssim < 0 || w.w_kspace < 0 || w.w_grad < 0)
        throw config_error("loss weights must be non-negative");
    if (w.w_charbonnier + w.w_ssim + w.w_kspace + w.w_grad <= 0)
        throw config_error("at least one loss weight must be positive");
    if (w.grad_a <= 0) throw config_error("grad_a must be > 0");
    if (w.mask_sigma <= 0) throw config_error("mask_sigma must be > 0");
    if (w.charbonnier_eps < 0) throw config_error("charbonnier_eps must be >= 0");
}

inline LossWeights loss_preset(const std::string& name) {
    LossWeights w;
    if (name == "R1") {
        w = LossWeights{1.0, 0.0, 0.0, 0.0, false, false, 0.0, 2.5, 32.0};
    } else if (name == "R2") {
        w = LossWeights{1.0, 0.0, 0.0, 0.0, false, false, 1e-3, 2.5, 32.0};
    } else if (name == "R3") {
        w = LossWeights{1.0, 0.1, 0.05, 0.1, false, false, 1e-3, 2.5, 32.0};
    } else if (name == "R4") {
        w = LossWeights{1.0, 0.1, 0.05, 0.1, true, true, 1e-3, 2.5, 32.0};
    } else {
        throw config_error("unknown loss preset: " + name);
    }
    return w;
}

struct LossBreakdown {
    double total = 0;
    double charbonnier = 0;
    double ssim = 0;
    double kspace = 0;
    double grad = 0;
};

namespace detail {

template <typename T>
void require_same_dims(const Image<T>& x, const Image<T>& y, const char* who) {
    if (!x.same_dims(y)) throw dimension_error(std::string(who) + ": dimension mismatch");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Charbonnier

template <typename T>
T charbonnier(const Image<T>& x, const Image<T>& y, T eps) {
    detail::require_same_dims(x, y, "charbonnier");
    T acc = 0;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        const T d = x.v[i] - y.v[i];
        acc += std::sqrt(d * d + eps * eps);
    }
    return acc / T(x.v.size());
}

// accumulates d(term)/dx scaled by weight into gx; returns the term value
template <typename T>
T charbonnier_backward(const Image<T>& x, const Image<T>& y, T eps, T weight, Image<T>& gx) {
    const T inv_n = T(1) / T(x.v.size());
    T acc = 0;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        const T d = x.v[i] - y.v[i];
        const T root = std::sqrt(d * d + eps * eps);
        acc += root;
        gx.v[i] += root > 0 ? weight * inv_n * d / root : T(0);
    }
    return acc * inv_n;
}

// ---------------------------------------------------------------------------
// SSIM with an 11x11 Gaussian window (sigma 1.5), windows fully inside the
// image, C1 = 0.01^2 and C2 = 0.03^2 at unit dynamic range.

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

namespace detail {

template <typename T>
const std::array<T, kSsimWindow>& ssim_kernel1d() {
    static const std::array<T, kSsimWindow> k = [] {
        std::array<T, kSsimWindow> a{};
        double sum = 0;
        for (std::size_t i = 0; i < kSsimWindow; ++i) {
            const double d = double(i) - double(kSsimWindow / 2);
            const double v = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            a[i] = T(v);
            sum += v;
        }
        for (auto& v : a) v = T(double(v) / sum);
        return a;
    }();
    return k;
}

// separable valid-region filtering with the SSIM window
template <typename T>
Image<T> window_filter_valid(const Image<T>& in) {
    const auto& k = ssim_kernel1d<T>();
    const std::size_t vw = in.w - kSsimWindow + 1;
    Image<T> rows(in.h, vw);
    for (std::size_t r = 0; r < in.h; ++r) {
        for (std::size_t c = 0; c < vw; ++c) {
            T acc = 0;
            for (std::size_t j = 0; j < kSsimWindow; ++j) acc += k[j] * in.at(r, c + j);
            rows.at(r, c) = acc;
        }
    }
    const std::size_t vh = in.h - kSsimWindow + 1;
    Image<T> out(vh, vw);
    for (std::size_t c = 0; c < vw; ++c) {
        for (std::size_t r = 0; r < vh; ++r) {
            T acc = 0;
            for (std::size_t j = 0; j < kSsimWindow; ++j) acc += k[j] * rows.at(r + j, c);
            out.at(r, c) = acc;
        }
    }
    return out;
}

// adjoint of window_filter_valid: scatter a valid-region field back to h x w
template <typename T>
Image<T> window_filter_adjoint(const Image<T>& g, std::size_t h, std::size_t w) {
    const auto& k = ssim_kernel1d<T>();
    const std::size_t vh = g.h, vw = g.w;
    Image<T> cols(h, vw);
    for (std::size_t c = 0; c < vw; ++c) {
        for (std::size_t r = 0; r < vh; ++r) {
            const T val = g.at(r, c);
            for (std::size_t j = 0; j < kSsimWindow; ++j) cols.at(r + j, c) += k[j] * val;
        }
    }
    Image<T> out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < vw; ++c) {
            const T val = cols.at(r, c);
            for (std::size_t j = 0; j < kSsimWindow; ++j) out.at(r, c + j) += k[j] * val;
        }
    }
    return out;
}

template <typename T>
struct SsimFields {
    Image<T> ux, uy, vxx, vyy, vxy;
};

template <typename T>
SsimFields<T> ssim_fields(const Image<T>& x, const Image<T>& y) {
    require_same_dims(x, y, "ssim");
    if (x.h < kSsimWindow || x.w < kSsimWindow)
        throw dimension_error("ssim: image smaller than the 11x11 window");
    Image<T> xx(x.h, x.w), yy(x.h, x.w), xy(x.h, x.w);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        xx.v[i] = x.v[i] * x.v[i];
        yy.v[i] = y.v[i] * y.v[i];
        xy.v[i] = x.v[i] * y.v[i];
    }
    return {window_filter_valid(x), window_filter_valid(y), window_filter_valid(xx),
            window_filter_valid(yy), window_filter_valid(xy)};
}

}  // namespace detail

template <typename T>
Image<T> ssim_map(const Image<T>& x, const Image<T>& y) {
    auto f = detail::ssim_fields(x, y);
    Image<T> map(f.ux.h, f.ux.w);
    const T c1 = T(kSsimC1), c2 = T(kSsimC2);
    for (std::size_t i = 0; i < map.v.size(); ++i) {
        const T ux = f.ux.v[i], uy = f.uy.v[i];
        const T a1 = T(2) * ux * uy + c1;
        const T a2 = T(2) * (f.vxy.v[i] - ux * uy) + c2;
        const T b1 = ux * ux + uy * uy + c1;
        const T b2 = (f.vxx.v[i] - ux * ux) + (f.vyy.v[i] - uy * uy) + c2;
        map.v[i] = (a1 * a2) / (b1 * b2);
    }
    return map;
}

template <typename T>
T ssim_index(const Image<T>& x, const Image<T>& y) {
    auto map = ssim_map(x, y);
    T acc = 0;
    for (T v : map.v) acc += v;
    return acc / T(map.v.size());
}

template <typename T>
T loss_ssim_l1(const Image<T>& x, const Image<T>& y) {
    auto map = ssim_map(x, y);
    T acc = 0;
    for (T v : map.v) acc += std::abs(T(1) - v);
    return acc / T(map.v.size());
}

template <typename T>
T loss_ssim_l1_backward(const Image<T>& x, const Image<T>& y, T weight, Image<T>& gx) {
    auto f = detail::ssim_fields(x, y);
    const std::size_t vh = f.ux.h, vw = f.ux.w;
    Image<T> d_ux(vh, vw), d_vxx(vh, vw), d_vxy(vh, vw);
    const T c1 = T(kSsimC1), c2 = T(kSsimC2);
    const T inv_n = T(1) / T(vh * vw);
    T value = 0;
    for (std::size_t i = 0; i < d_ux.v.size(); ++i) {
        const T ux = f.ux.v[i], uy = f.uy.v[i];
        const T a1 = T(2) * ux * uy + c1;
        const T a2 = T(2) * (f.vxy.v[i] - ux * uy) + c2;
        const T b1 = ux * ux + uy * uy + c1;
        const T b2 = (f.vxx.v[i] - ux * ux) + (f.vyy.v[i] - uy * uy) + c2;
        const T s = (a1 * a2) / (b1 * b2);
        value += std::abs(T(1) - s);
        // d|1-s|/ds, with the s = 1 subgradient taken as 0
        T ds = 0;
        if (s < T(1))
            ds = -weight * inv_n;
        else if (s > T(1))
            ds = weight * inv_n;
        const T ds_dux = T(2) * uy * (a2 - a1) / (b1 * b2) - s * (T(2) * ux / b1 - T(2) * ux / b2);
        d_ux.v[i] = ds * ds_dux;
        d_vxx.v[i] = ds * (-s / b2);
        d_vxy.v[i] = ds * (T(2) * a1 / (b1 * b2));
    }
    auto g_ux = detail::window_filter_adjoint(d_ux, x.h, x.w);
    auto g_vxx = detail::window_filter_adjoint(d_vxx, x.h, x.w);
    auto g_vxy = detail::window_filter_adjoint(d_vxy, x.h, x.w);
    for (std::size_t i = 0; i < gx.v.size(); ++i)
        gx.v[i] += g_ux.v[i] + T(2) * x.v[i] * g_vxx.v[i] + y.v[i] * g_vxy.v[i];
    return value * inv_n;
}

// ---------------------------------------------------------------------------
// Sobel gradient map. Reflective (symmetric) borders; the magnitude is divided
// by the operator's maximum response on [0,1] inputs, sqrt(20), so the map
// lives in [0,1].

inline const double kSobelNorm = std::sqrt(20.0);

namespace detail {

inline std::size_t reflect(std::int64_t i, std::size_t n) {
    if (i < 0) i = -i - 1;
    const auto sn = static_cast<std::int64_t>(n);
    if (i >= sn) i = 2 * sn - i - 1;
    return static_cast<std::size_t>(i);
}

template <typename T>
void sobel_pair(const Image<T>& img, Image<T>& gx, Image<T>& gy) {
    gx = Image<T>(img.h, img.w);
    gy = Image<T>(img.h, img.w);
    for (std::size_t r = 0; r < img.h; ++r) {
        for (std::size_t c = 0; c < img.w; ++c) {
            auto v = [&](int dr, int dc) {
                return img.at(reflect(static_cast<std::int64_t>(r) + dr, img.h),
                              reflect(static_cast<std::int64_t>(c) + dc, img.w));
            };
            // column/row sums first: identical sums cancel exactly on flats
            const T left = v(-1, -1) + T(2) * v(0, -1) + v(1, -1);
            const T right = v(-1, 1) + T(2) * v(0, 1) + v(1, 1);
            const T top = v(-1, -1) + T(2) * v(-1, 0) + v(-1, 1);
            const T bottom = v(1, -1) + T(2) * v(1, 0) + v(1, 1);
            gx.at(r, c) = right - left;
            gy.at(r, c) = bottom - top;
        }
    }
}

// adjoint of sobel_pair: scatter (d_gx, d_gy) back through the reflected taps
template <typename T>
void sobel_adjoint(const Image<T>& d_gx, const Image<T>& d_gy, Image<T>& out) {
    static const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    for (std::size_t r = 0; r < d_gx.h; ++r) {
        for (std::size_t c = 0; c < d_gx.w; ++c) {
            const T vx = d_gx.at(r, c);
            const T vy = d_gy.at(r, c);
            if (vx == T(0) && vy == T(0)) continue;
            for (int dr = -1; dr <= 1; ++dr) {
                const std::size_t rr = reflect(static_cast<std::int64_t>(r) + dr, d_gx.h);
                for (int dc = -1; dc <= 1; ++dc) {
                    const std::size_t cc = reflect(static_cast<std::int64_t>(c) + dc, d_gx.w);
                    out.at(rr, cc) += T(kx[dr + 1][dc + 1]) * vx + T(ky[dr + 1][dc + 1]) * vy;
                }
            }
        }
    }
}

}  // namespace detail

template <typename T>
Image<T> grad_map(const Image<T>& img) {
    if (img.h < 3 || img.w < 3) throw dimension_error("grad_map: image smaller than 3x3");
    Image<T> gx, gy;
    detail::sobel_pair(img, gx, gy);
    Image<T> map(img.h, img.w);
    const T norm = T(kSobelNorm);
    for (std::size_t i = 0; i < map.v.size(); ++i)
        map.v[i] = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]) / norm;
    return map;
}

// Eq-style small-gradient amplification: M -> 1 - exp(-a M)
template <typename T>
Image<T> amplify_grad(Image<T> map, T a = T(2.5)) {
    if (a <= 0) throw config_error("amplify_grad: a must be > 0");
    for (T& v : map.v) v = T(1) - std::exp(-a * v);
    return map;
}

template <typename T>
T loss_grad_l1(const Image<T>& x, const Image<T>& y, bool amplified, T a = T(2.5)) {
    detail::require_same_dims(x, y, "loss_grad_l1");
    auto mx = grad_map(x);
    auto my = grad_map(y);
    if (amplified) {
        mx = amplify_grad(std::move(mx), a);
        my = amplify_grad(std::move(my), a);
    }
    T acc = 0;
    for (std::size_t i = 0; i < mx.v.size(); ++i) acc += std::abs(mx.v[i] - my.v[i]);
    return acc / T(mx.v.size());
}

template <typename T>
T loss_grad_l1_backward(const Image<T>& x, const Image<T>& y, bool amplified, T a, T weight,
                        Image<T>& gx_out) {
    Image<T> gx, gy;
    detail::sobel_pair(x, gx, gy);
    Image<T> mx(x.h, x.w);
    const T norm = T(kSobelNorm);
    for (std::size_t i = 0; i < mx.v.size(); ++i)
        mx.v[i] = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]) / norm;

    auto my = grad_map(y);
    const T inv_n = T(1) / T(mx.v.size());
    T value = 0;

    // d loss / d mx, folding in the amplification chain when active
    Image<T> d_mx(x.h, x.w);
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
        T px = mx.v[i], py = my.v[i];
        T chain = T(1);
        if (amplified) {
            chain = a * std::exp(-a * px);
            px = T(1) - std::exp(-a * px);
            py = T(1) - std::exp(-a * py);
        }
        const T diff = px - py;
        value += std::abs(diff);
        T s = 0;
        if (diff > 0)
            s = T(1);
        else if (diff < 0)
            s = T(-1);
        d_mx.v[i] = weight * inv_n * s * chain;
    }

    // through the magnitude: d mx / d gx = gx / (|g| * norm)
    Image<T> d_gx(x.h, x.w), d_gy(x.h, x.w);
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
        const T mag = mx.v[i] * norm;
        if (mag > 0) {
            d_gx.v[i] = d_mx.v[i] * gx.v[i] / (mag * norm);
            d_gy.v[i] = d_mx.v[i] * gy.v[i] / (mag * norm);
        }
    }
    detail::sobel_adjoint(d_gx, d_gy, gx_out);
    return value * inv_n;
}

// ---------------------------------------------------------------------------
// k-space MSE, optionally with the Gaussian high-frequency mask applied to the
// overturned spectra of both images. The mask sigma is defined for 256^2
// spectra and scales with sqrt(h*w)/256. Overturning is an identity
// permutation, so the mask indexes the Standard-layout difference directly.

namespace detail {

template <typename T>
T mask_sigma_for(std::size_t h, std::size_t w, T sigma) {
    return sigma * T(std::sqrt(double(h) * double(w)) / 256.0);
}

}  // namespace detail

template <typename T>
T kspace_mse(const Image<T>& x, const Image<T>& y, bool masked, T sigma = T(32)) {
    detail::require_same_dims(x, y, "kspace_mse");
    auto sx = fft2_ortho(x);
    auto sy = fft2_ortho(y);
    const std::size_t n = sx.data.size();
    T acc = 0;
    if (!masked) {
        for (std::size_t i = 0; i < n; ++i) acc += std::norm(sx.data[i] - sy.data[i]);
    } else {
        const auto mask = gaussian_mask<T>(x.h, x.w, double(detail::mask_sigma_for(x.h, x.w, sigma)));
        for (std::size_t i = 0; i < n; ++i) {
            const T m = mask.data[i];
            acc += m * m * std::norm(sx.data[i] - sy.data[i]);
        }
    }
    return acc / T(n);
}

template <typename T>
T kspace_mse_backward(const Image<T>& x, const Image<T>& y, bool masked, T sigma, T weight,
                      Image<T>& gx) {
    auto sx = fft2_ortho(x);
    auto sy = fft2_ortho(y);
    const std::size_t n = sx.data.size();
    Spectrum<T> d(x.h, x.w, Layout::standard);
    T value = 0;
    if (!masked) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto diff = sx.data[i] - sy.data[i];
            value += std::norm(diff);
            d.data[i] = diff;
        }
    } else {
        const auto mask = gaussian_mask<T>(x.h, x.w, double(detail::mask_sigma_for(x.h, x.w, sigma)));
        for (std::size_t i = 0; i < n; ++i) {
            const T m = mask.data[i];
            const auto diff = sx.data[i] - sy.data[i];
            value += m * m * std::norm(diff);
            d.data[i] = m * m * diff;
        }
    }
    // L = (1/n) sum |D|^2 with unitary transforms: dL/dx = (2/n) Re F^H D
    auto back = ifft2_ortho(d);
    const T scale = T(2) / T(n);
    for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += weight * scale * back.v[i];
    return value / T(n);
}

// ---------------------------------------------------------------------------
// Composite objective

template <typename T>
LossBreakdown composite_loss(const Image<T>& x, const Image<T>& y, const LossWeights& w) {
    validate(w);
    LossBreakdown b;
    if (w.w_charbonnier > 0) b.charbonnier = double(charbonnier(x, y, T(w.charbonnier_eps)));
    if (w.w_ssim > 0) b.ssim = double(loss_ssim_l1(x, y));
    if (w.w_kspace > 0) b.kspace = double(kspace_mse(x, y, w.kspace_masked, T(w.mask_sigma)));
    if (w.w_grad > 0) b.grad = double(loss_grad_l1(x, y, w.grad_amplified, T(w.grad_a)));
    b.total = w.w_charbonnier * b.charbonnier + w.w_ssim * b.ssim + w.w_kspace * b.kspace +
              w.w_grad * b.grad;
    return b;
}

// gradient of the weighted total with respect to x; also reports the breakdown
template <typename T>
Image<T> composite_loss_grad(const Image<T>& x, const Image<T>& y, const LossWeights& w,
                             LossBreakdown* breakdown = nullptr) {
    validate(w);
    Image<T> gx(x.h, x.w);
    LossBreakdown b;
    if (w.w_charbonnier > 0)
        b.charbonnier =
            double(charbonnier_backward(x, y, T(w.charbonnier_eps), T(w.w_charbonnier), gx));
    if (w.w_ssim > 0) b.ssim = double(loss_ssim_l1_backward(x, y, T(w.w_ssim), gx));
    if (w.w_kspace > 0)
        b.kspace = double(
            kspace_mse_backward(x, y, w.kspace_masked, T(w.mask_sigma), T(w.w_kspace), gx));
    if (w.w_grad > 0)
        b.grad = double(
            loss_grad_l1_backward(x, y, w.grad_amplified, T(w.grad_a), T(w.w_grad), gx));
    b.total = w.w_charbonnier * b.charbonnier + w.w_ssim * b.ssim + w.w_kspace * b.kspace +
              w.w_grad * b.grad;
    if (breakdown) *breakdown = b;
    return gx;
}

// ---------------------------------------------------------------------------
// Metrics

template <typename T>
double psnr(const Image<T>& x, const Image<T>& y, double peak = 1.0) {
    detail::require_same_dims(x, y, "psnr");
    double mse = 0;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        const double d = double(x.v[i]) - double(y.v[i]);
        mse += d * d;
    }
    mse /= double(x.v.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

struct Aggregate {
    double mean = 0;
    double stddev = 0;  // population (divisor n)
    std::size_t n = 0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
    if (values.size() < 2) throw config_error("aggregate: need at least 2 values");
    Aggregate a;
    a.n = values.size();
    for (double v : values) a.mean += v;
    a.mean /= double(a.n);
    double s2 = 0;
    for (double v : values) s2 += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(s2 / double(a.n));
    return a;
}

inline std::string format_mean_std(const Aggregate& a, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f±%.*f", digits, a.mean, digits, a.stddev);
    return buf;
}

}  // namespace mrir
