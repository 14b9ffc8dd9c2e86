#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/fft.hpp"
#include "mrir/image.hpp"

namespace mrir {

// Frequency layout of a 2D spectrum. Standard puts DC at (0,0); Centered puts
// DC at the array center; Overturned re-reads the Standard arrangement as
// high-frequency-central (the Nyquist bins of a Standard spectrum already sit
// at the center, so no data moves).
enum class Layout { standard, centered, overturned };

template <typename T>
struct Spectrum {
    std::size_t h = 0;
    std::size_t w = 0;
    Layout layout = Layout::standard;
    std::vector<std::complex<T>> data;

    Spectrum() = default;
    Spectrum(std::size_t height, std::size_t width, Layout lay)
        : h(height), w(width), layout(lay), data(height * width) {}

    std::complex<T>& at(std::size_t r, std::size_t c) { return data[r * w + c]; }
    const std::complex<T>& at(std::size_t r, std::size_t c) const { return data[r * w + c]; }
};

using Spectrum2D = Spectrum<double>;

// Unitary 2D DFT: sum |spectrum|^2 equals sum |image|^2.
template <typename T>
Spectrum<T> fft2_ortho(const Image<T>& img) {
    if (!all_finite(img)) throw invalid_image_error("fft2_ortho: non-finite input");
    Spectrum<T> spec(img.h, img.w, Layout::standard);
    for (std::size_t i = 0; i < img.v.size(); ++i) spec.data[i] = std::complex<T>(img.v[i], T(0));
    fft::transform_2d(spec.data.data(), spec.h, spec.w, false);
    const T scale = T(1) / T(std::sqrt(double(img.h) * double(img.w)));
    for (auto& z : spec.data) z *= scale;
    return spec;
}

// Unitary inverse; returns the real part. The largest |imaginary| component is
// written to *imag_residual when given (small for conjugate-symmetric input).
template <typename T>
Image<T> ifft2_ortho(const Spectrum<T>& spec, T* imag_residual = nullptr) {
    if (spec.layout != Layout::standard)
        throw layout_error("ifft2_ortho: expected Standard layout");
    std::vector<std::complex<T>> buf = spec.data;
    fft::transform_2d(buf.data(), spec.h, spec.w, true);
    const T scale = T(1) / T(std::sqrt(double(spec.h) * double(spec.w)));
    Image<T> img(spec.h, spec.w);
    T resid = T(0);
    for (std::size_t i = 0; i < buf.size(); ++i) {
        img.v[i] = buf[i].real() * scale;
        resid = std::max(resid, std::abs(buf[i].imag() * scale));
    }
    if (imag_residual) *imag_residual = resid;
    return img;
}

// Quadrant swap moving DC to the array center (and back; self-inverse on even
// dimensions). Standard <-> Centered.
template <typename T>
Spectrum<T> shift_center(const Spectrum<T>& spec) {
    if (spec.layout == Layout::overturned)
        throw layout_error("shift_center: Overturned layout not shiftable");
    Spectrum<T> out(spec.h, spec.w,
                    spec.layout == Layout::standard ? Layout::centered : Layout::standard);
    const std::size_t rh = spec.h / 2, rw = spec.w / 2;
    for (std::size_t r = 0; r < spec.h; ++r) {
        const std::size_t rr = (r + rh) % spec.h;
        for (std::size_t c = 0; c < spec.w; ++c) out.at(rr, (c + rw) % spec.w) = spec.at(r, c);
    }
    return out;
}

// Re-tag a Standard spectrum as high-frequency-central; identity permutation,
// self-inverse.
template <typename T>
Spectrum<T> overturn(const Spectrum<T>& spec) {
    if (spec.layout == Layout::centered)
        throw layout_error("overturn: expected Standard or Overturned layout");
    Spectrum<T> out = spec;
    out.layout = spec.layout == Layout::standard ? Layout::overturned : Layout::standard;
    return out;
}

// Keep the central out_h x out_w block of a Centered spectrum, rescaled by
// sqrt(area ratio) so band-limited amplitudes survive the orthonormal round
// trip unchanged.
template <typename T>
Spectrum<T> crop_center(const Spectrum<T>& spec, std::size_t out_h, std::size_t out_w) {
    if (spec.layout != Layout::centered) throw layout_error("crop_center: expected Centered layout");
    if (out_h > spec.h || out_w > spec.w || out_h % 2 || out_w % 2)
        throw dimension_error("crop_center: output dims must be even and <= input dims");
    Spectrum<T> out(out_h, out_w, Layout::centered);
    const std::size_t r0 = spec.h / 2 - out_h / 2;
    const std::size_t c0 = spec.w / 2 - out_w / 2;
    const T scale = T(std::sqrt(double(out_h) * double(out_w) / (double(spec.h) * double(spec.w))));
    for (std::size_t r = 0; r < out_h; ++r)
        for (std::size_t c = 0; c < out_w; ++c) out.at(r, c) = spec.at(r0 + r, c0 + c) * scale;
    return out;
}

// Zero-pad a Centered spectrum to out_h x out_w (the crop's inverse on the
// retained block, same sqrt(area ratio) convention).
template <typename T>
Spectrum<T> pad_center(const Spectrum<T>& spec, std::size_t out_h, std::size_t out_w) {
    if (spec.layout != Layout::centered) throw layout_error("pad_center: expected Centered layout");
    if (out_h < spec.h || out_w < spec.w || out_h % 2 || out_w % 2)
        throw dimension_error("pad_center: output dims must be even and >= input dims");
    Spectrum<T> out(out_h, out_w, Layout::centered);
    const std::size_t r0 = out_h / 2 - spec.h / 2;
    const std::size_t c0 = out_w / 2 - spec.w / 2;
    const T scale = T(std::sqrt(double(out_h) * double(out_w) / (double(spec.h) * double(spec.w))));
    for (std::size_t r = 0; r < spec.h; ++r)
        for (std::size_t c = 0; c < spec.w; ++c) out.at(r0 + r, c0 + c) = spec.at(r, c) * scale;
    return out;
}

// Gaussian enhancement mask, value 1 at the array center (h/2, w/2).
template <typename T = double>
struct GaussianMaskT {
    std::size_t h = 0, w = 0;
    T sigma = T(0);
    std::vector<T> data;
    T at(std::size_t r, std::size_t c) const { return data[r * w + c]; }
};

using GaussianMask = GaussianMaskT<double>;

template <typename T = double>
GaussianMaskT<T> gaussian_mask(std::size_t h, std::size_t w, double sigma) {
    if (sigma <= 0) throw config_error("gaussian_mask: sigma must be > 0");
    GaussianMaskT<T> m;
    m.h = h;
    m.w = w;
    m.sigma = T(sigma);
    m.data.resize(h * w);
    const double cr = double(h / 2), cc = double(w / 2);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double dr = double(r) - cr, dc = double(c) - cc;
            m.data[r * w + c] = T(std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma)));
        }
    }
    return m;
}

// sigma sweep of the high/low-frequency balance objective. After overturn the
// high-frequency region is the central square of side h/2; J(sigma) is the
// absolute mean gap plus the absolute std gap between the masked magnitudes
// of that region and its complement, averaged over the calibration images.
struct SigmaSweepEntry {
    double sigma;
    double objective;
};

struct SigmaSweepResult {
    double sigma = 0;
    std::vector<SigmaSweepEntry> table;
};

template <typename T>
SigmaSweepResult select_sigma(const std::vector<Image<T>>& calibration, double sigma_lo = 10,
                              double sigma_hi = 50, double step = 1) {
    if (calibration.empty()) throw config_error("select_sigma: empty calibration set");
    const std::size_t h = calibration.front().h, w = calibration.front().w;
    for (const auto& img : calibration)
        if (img.h != h || img.w != w)
            throw dimension_error("select_sigma: calibration images must share one size");

    std::vector<std::vector<double>> mags;
    mags.reserve(calibration.size());
    for (const auto& img : calibration) {
        auto spec = overturn(fft2_ortho(img.template cast<double>()));
        std::vector<double> m(spec.data.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(spec.data[i]);
        mags.push_back(std::move(m));
    }

    const std::size_t r0 = h / 2 - h / 4, r1 = r0 + h / 2;
    const std::size_t c0 = w / 2 - w / 4, c1 = c0 + w / 2;

    SigmaSweepResult result;
    double best = 0;
    bool first = true;
    for (double sigma = sigma_lo; sigma <= sigma_hi + 1e-12; sigma += step) {
        const auto mask = gaussian_mask<double>(h, w, sigma);
        double j_sum = 0;
        for (const auto& m : mags) {
            double hf_s = 0, hf_s2 = 0, lf_s = 0, lf_s2 = 0;
            std::size_t hf_n = 0, lf_n = 0;
            for (std::size_t r = 0; r < h; ++r) {
                for (std::size_t c = 0; c < w; ++c) {
                    const double v = m[r * w + c] * mask.at(r, c);
                    if (r >= r0 && r < r1 && c >= c0 && c < c1) {
                        hf_s += v;
                        hf_s2 += v * v;
                        ++hf_n;
                    } else {
                        lf_s += v;
                        lf_s2 += v * v;
                        ++lf_n;
                    }
                }
            }
            const double hf_mu = hf_s / double(hf_n), lf_mu = lf_s / double(lf_n);
            const double hf_sd = std::sqrt(std::max(0.0, hf_s2 / double(hf_n) - hf_mu * hf_mu));
            const double lf_sd = std::sqrt(std::max(0.0, lf_s2 / double(lf_n) - lf_mu * lf_mu));
            j_sum += std::abs(hf_mu - lf_mu) + std::abs(hf_sd - lf_sd);
        }
        const double j = j_sum / double(mags.size());
        result.table.push_back({sigma, j});
        if (first || j < best) {  // ties resolved toward the smaller sigma
            best = j;
            result.sigma = sigma;
            first = false;
        }
    }
    return result;
}

}  // namespace mrir
