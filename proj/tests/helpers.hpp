#pragma once

#include <cstdint>

#include "mrir/image.hpp"
#include "mrir/kspace.hpp"
#include "mrir/rng.hpp"

namespace testutil {

inline mrir::Image2D random_image(std::size_t h, std::size_t w, std::uint64_t seed,
                                  double lo = 0.0, double hi = 1.0) {
    mrir::Rng rng(seed);
    mrir::Image2D img(h, w);
    for (auto& x : img.v) x = rng.uniform(lo, hi);
    return img;
}

// random image smoothed with a small box filter; useful where kinks in
// gradient-based losses must stay away from the finite-difference step
inline mrir::Image2D smooth_random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    auto raw = random_image(h, w, seed);
    mrir::Image2D out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0;
            int n = 0;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const auto rr = static_cast<std::int64_t>(r) + dr;
                    const auto cc = static_cast<std::int64_t>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<std::int64_t>(h) ||
                        cc >= static_cast<std::int64_t>(w))
                        continue;
                    s += raw.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                    ++n;
                }
            }
            out.at(r, c) = s / n;
        }
    }
    return out;
}

}  // namespace testutil
