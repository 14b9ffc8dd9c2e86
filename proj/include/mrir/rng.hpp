#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace mrir {

// All randomness in the pipeline flows from one root seed through named
// sub-streams, so results are independent of evaluation order and worker
// scheduling. Stream ids are hashed FNV-1a style into the mt19937_64 seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix(seed)) {}

    static std::uint64_t derive(std::uint64_t seed, std::string_view stream) {
        std::uint64_t h = 0xcbf29ce484222325ull ^ mix(seed);
        for (char c : stream) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0x100000001b3ull;
        }
        return mix(h);
    }
    static std::uint64_t derive(std::uint64_t seed, std::string_view stream,
                                std::uint64_t index) {
        return mix(derive(seed, stream) ^ mix(index + 0x9e3779b97f4a7c15ull));
    }

    Rng stream(std::string_view name) { return Rng(derive(state(), name)); }

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive, unbiased via rejection
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    double normal() {
        // Box-Muller, consumes two uniforms deterministically
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t next() { return eng_(); }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::int64_t>(last - first);
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::swap(first[i], first[uniform_int(0, i)]);
        }
    }

  private:
    std::uint64_t state() { return eng_(); }

    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
};

}  // namespace mrir
