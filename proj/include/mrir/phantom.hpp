#pragma once

#include <cmath>
#include <cstdint>

#include "mrir/common.hpp"
#include "mrir/image.hpp"
#include "mrir/rng.hpp"

namespace mrir {

// Synthetic slice generator standing in for clinical volumes: smooth intensity
// ramp (low-frequency content), soft-edged ellipses (edge content) and a sum
// of band-limited plane waves (texture content). Deterministic per spec.
struct PhantomSpec {
    std::uint64_t seed = 0;
    std::size_t size = 256;
    std::size_t n_ellipses_min = 4;
    std::size_t n_ellipses_max = 9;
    double texture_amplitude = 0.08;
    double edge_sharpness = 24.0;
};

inline void validate(const PhantomSpec& spec) {
    if (spec.size < 16) throw config_error("phantom size must be >= 16");
    if (spec.n_ellipses_min < 1 || spec.n_ellipses_max < spec.n_ellipses_min)
        throw config_error("phantom ellipse count range invalid");
    if (spec.texture_amplitude < 0) throw config_error("texture_amplitude must be >= 0");
    if (spec.edge_sharpness <= 0) throw config_error("edge_sharpness must be > 0");
}

inline Image2D make_phantom(const PhantomSpec& spec) {
    validate(spec);
    const auto n = spec.size;
    const double N = static_cast<double>(n);
    Image2D img(n, n);

    Rng root(spec.seed);
    Rng ramp_rng = root.stream("ramp");
    Rng ell_rng = root.stream("ellipses");
    Rng tex_rng = root.stream("texture");

    // smooth background: tilted plane plus one low-frequency bump
    const double base = ramp_rng.uniform(0.25, 0.45);
    const double gx = ramp_rng.uniform(-0.2, 0.2);
    const double gy = ramp_rng.uniform(-0.2, 0.2);
    const double bump_amp = ramp_rng.uniform(0.08, 0.18);
    const double bump_px = ramp_rng.uniform(0.0, 1.0);
    const double bump_py = ramp_rng.uniform(0.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double x = static_cast<double>(c) / N;
            const double y = static_cast<double>(r) / N;
            img.at(r, c) = base + gx * x + gy * y +
                           bump_amp * std::cos(6.283185307179586 * (x - bump_px)) *
                               std::cos(6.283185307179586 * (y - bump_py));
        }
    }

    // ellipses with logistic edge profile; width controlled by edge_sharpness
    const auto n_ell = static_cast<std::size_t>(ell_rng.uniform_int(
        static_cast<std::int64_t>(spec.n_ellipses_min),
        static_cast<std::int64_t>(spec.n_ellipses_max)));
    for (std::size_t e = 0; e < n_ell; ++e) {
        const double cx = ell_rng.uniform(0.22, 0.78) * N;
        const double cy = ell_rng.uniform(0.22, 0.78) * N;
        const double sa = ell_rng.uniform(0.08, 0.32) * N;
        const double sb = ell_rng.uniform(0.08, 0.32) * N;
        const double ang = ell_rng.uniform(0.0, 3.141592653589793);
        const double amp = (ell_rng.uniform() < 0.5 ? -1.0 : 1.0) * ell_rng.uniform(0.15, 0.4);
        const double ca = std::cos(ang), sn = std::sin(ang);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double dx = static_cast<double>(c) - cx;
                const double dy = static_cast<double>(r) - cy;
                const double u = (ca * dx + sn * dy) / sa;
                const double t = (-sn * dx + ca * dy) / sb;
                const double q = u * u + t * t;
                img.at(r, c) += amp / (1.0 + std::exp(-spec.edge_sharpness * (1.0 - q)));
            }
        }
    }

    // band-limited texture: plane waves at 1/8..1/3 of the sampling rate
    if (spec.texture_amplitude > 0) {
        constexpr int n_waves = 32;
        const double amp_scale = spec.texture_amplitude / std::sqrt(double(n_waves));
        for (int j = 0; j < n_waves; ++j) {
            const double freq = tex_rng.uniform(N / 8.0, N / 3.0);  // cycles per image
            const double theta = tex_rng.uniform(0.0, 6.283185307179586);
            const double phase = tex_rng.uniform(0.0, 6.283185307179586);
            const double fx = freq * std::cos(theta) / N;
            const double fy = freq * std::sin(theta) / N;
            const double a = amp_scale * tex_rng.uniform(0.5, 1.0);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                    img.at(r, c) += a * std::cos(6.283185307179586 *
                                                     (fx * static_cast<double>(c) +
                                                      fy * static_cast<double>(r)) +
                                                 phase);
                }
            }
        }
    }

    return normalize_unit(img);
}

}  // namespace mrir
