#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "helpers.hpp"
#include "mrir/objectives.hpp"
#include "mrir/phantom.hpp"

using namespace mrir;

namespace {

// direct-formula SSIM evaluation, independent of the library's separable path
double ssim_index_oracle(const Image2D& x, const Image2D& y) {
    constexpr int W = 11;
    double k[W][W];
    double ksum = 0;
    for (int i = 0; i < W; ++i) {
        for (int j = 0; j < W; ++j) {
            const double di = i - W / 2, dj = j - W / 2;
            k[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
            ksum += k[i][j];
        }
    }
    for (auto& row : k)
        for (auto& v : row) v /= ksum;

    const double c1 = 1e-4, c2 = 9e-4;
    double acc = 0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + W <= x.h; ++r0) {
        for (std::size_t c0 = 0; c0 + W <= x.w; ++c0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < W; ++i) {
                for (int j = 0; j < W; ++j) {
                    const double a = x.at(r0 + i, c0 + j);
                    const double b = y.at(r0 + i, c0 + j);
                    mx += k[i][j] * a;
                    my += k[i][j] * b;
                    sxx += k[i][j] * a * a;
                    syy += k[i][j] * b * b;
                    sxy += k[i][j] * a * b;
                }
            }
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return acc / double(count);
}

// finite-difference check of an accumulate-style backward against its forward
void check_gradient(const Image2D& x, const Image2D& y,
                    const std::function<double(const Image2D&)>& forward,
                    const std::function<void(Image2D&)>& backward, double tol) {
    Image2D analytic(x.h, x.w);
    backward(analytic);
    Rng rng(777);
    const double h = 1e-6;
    for (int probe = 0; probe < 40; ++probe) {
        const auto i = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(x.v.size()) - 1));
        Image2D xp = x, xm = x;
        xp.v[i] += h;
        xm.v[i] -= h;
        const double num = (forward(xp) - forward(xm)) / (2 * h);
        const double ana = analytic.v[i];
        const double denom = std::max({std::abs(num), std::abs(ana), 1e-8});
        INFO("probe " << probe << " index " << i << " numeric " << num << " analytic " << ana);
        CHECK(std::abs(num - ana) / denom < tol);
    }
}

}  // namespace

TEST_CASE("charbonnier values", "[objectives]") {
    auto x = testutil::random_image(8, 8, 1);
    // sqrt(eps*eps) can sit one ulp off eps; the zero-difference value is the
    // eps floor to within that
    CHECK(charbonnier(x, x, 1e-3) == Catch::Approx(1e-3).margin(1e-17));
    CHECK(charbonnier(x, x, 0.0) == 0.0);

    Image2D a(4, 4, 0.5), b(4, 4, 0.2);
    CHECK(charbonnier(a, b, 1e-3) == Catch::Approx(std::sqrt(0.09 + 1e-6)).epsilon(1e-14));
    CHECK(charbonnier(a, b, 0.0) == Catch::Approx(0.3).epsilon(1e-14));  // eps->0 is plain L1

    Image2D wrong(3, 4, 0.0);
    CHECK_THROWS_AS(charbonnier(a, wrong, 1e-3), dimension_error);
}

TEST_CASE("ssim self-similarity is exactly 1", "[objectives]") {
    auto x = testutil::random_image(16, 16, 2);
    auto map = ssim_map(x, x);
    for (double v : map.v) CHECK(v == 1.0);
    CHECK(ssim_index(x, x) == 1.0);
    CHECK(loss_ssim_l1(x, x) == 0.0);
}

TEST_CASE("ssim matches the direct-formula oracle", "[objectives]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto x = testutil::random_image(20, 24, 300 + seed);
        auto y = testutil::random_image(20, 24, 400 + seed);
        const double lib = ssim_index(x, y);
        const double ora = ssim_index_oracle(x, y);
        CHECK(std::abs(lib - ora) < 1e-9);
        CHECK(std::abs(ssim_index(x, y) - ssim_index(y, x)) < 1e-12);
        CHECK(lib >= -1.0);
        CHECK(lib <= 1.0);
        // map <= 1 everywhere, so the L1 loss equals 1 - index
        CHECK(loss_ssim_l1(x, y) == Catch::Approx(1.0 - lib).margin(1e-12));
    }
}

TEST_CASE("inverted structured image scores negative ssim", "[objectives]") {
    PhantomSpec spec;
    spec.seed = 11;
    spec.size = 64;
    auto x = make_phantom(spec);
    Image2D y(x.h, x.w);
    for (std::size_t i = 0; i < x.v.size(); ++i) y.v[i] = 1.0 - x.v[i];
    CHECK(ssim_index(x, y) < 0.0);
}

TEST_CASE("ssim window guards", "[objectives]") {
    Image2D small(8, 8, 0.5);
    CHECK_THROWS_AS(ssim_map(small, small), dimension_error);
    Image2D a(16, 16, 0.5), b(16, 12, 0.5);
    CHECK_THROWS_AS(ssim_map(a, b), dimension_error);
}

TEST_CASE("sobel normalization constant is the max response on [0,1] inputs", "[objectives]") {
    // enumerate all binary 3x3 patches; the max of a convex function over the
    // box sits at a vertex
    double best = 0;
    for (int bits = 0; bits < 512; ++bits) {
        double p[9];
        for (int i = 0; i < 9; ++i) p[i] = (bits >> i) & 1 ? 1.0 : 0.0;
        const double gx = (p[2] + 2 * p[5] + p[8]) - (p[0] + 2 * p[3] + p[6]);
        const double gy = (p[6] + 2 * p[7] + p[8]) - (p[0] + 2 * p[1] + p[2]);
        best = std::max(best, std::sqrt(gx * gx + gy * gy));
    }
    CHECK(best == Catch::Approx(kSobelNorm).epsilon(1e-14));
}

TEST_CASE("grad_map basics", "[objectives]") {
    Image2D flat(8, 8, 0.42);
    auto zero = grad_map(flat);
    for (double v : zero.v) CHECK(v == 0.0);

    // vertical step edge: the maximal response sits on the edge columns and
    // interior rows agree
    const std::size_t n = 16, edge = 8;
    Image2D step(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) step.at(r, c) = c >= edge ? 1.0 : 0.0;
    auto g = grad_map(step);
    double best = 0;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (g.at(n / 2, c) > best) {
            best = g.at(n / 2, c);
            best_c = c;
        }
    }
    CHECK((best_c == edge - 1 || best_c == edge));
    CHECK(best == Catch::Approx(4.0 / kSobelNorm).epsilon(1e-12));
    for (std::size_t r = 2; r + 2 < n; ++r) CHECK(g.at(r, best_c) == g.at(2, best_c));

    // ramp with slope s: interior response is 8*s / norm (hand convolution)
    const double s = 0.05;
    Image2D ramp(10, 10);
    for (std::size_t r = 0; r < 10; ++r)
        for (std::size_t c = 0; c < 10; ++c) ramp.at(r, c) = s * double(c);
    auto gr = grad_map(ramp);
    const std::size_t probes[5][2] = {{2, 2}, {3, 5}, {5, 4}, {6, 7}, {7, 3}};
    for (auto& p : probes)
        CHECK(gr.at(p[0], p[1]) == Catch::Approx(8.0 * s / kSobelNorm).epsilon(1e-12));

    Image2D tiny(2, 2, 0.0);
    CHECK_THROWS_AS(grad_map(tiny), dimension_error);
}

TEST_CASE("amplify_grad fixed points and monotonicity", "[objectives]") {
    Image2D m(1, 3);
    m.v = {0.0, 0.01, 1.0};
    auto out = amplify_grad(m, 2.5);
    CHECK(out.v[0] == 0.0);
    CHECK(out.v[2] == Catch::Approx(1.0 - std::exp(-2.5)).margin(1e-15));
    CHECK(out.v[1] / 0.01 >= 2.0);  // small gradients are amplified

    // strictly monotone on a grid
    double prev = -1;
    for (int i = 0; i <= 100; ++i) {
        Image2D probe(1, 1);
        probe.v[0] = i / 100.0;
        const double v = amplify_grad(probe, 2.5).v[0];
        CHECK(v > prev);
        CHECK(v <= 1.0 - std::exp(-2.5) + 1e-15);
        prev = v;
    }
    CHECK_THROWS_AS(amplify_grad(m, 0.0), config_error);
}

TEST_CASE("gradient-map loss cases", "[objectives]") {
    auto x = testutil::random_image(12, 12, 5);
    CHECK(loss_grad_l1(x, x, false) == 0.0);
    CHECK(loss_grad_l1(x, x, true) == 0.0);

    // constant offset has identical gradient maps
    Image2D a(12, 12, 0.3), b(12, 12, 0.55);
    CHECK(loss_grad_l1(a, b, false) == 0.0);

    // two gentle ramps: all map values are small, where the amplification
    // slope exceeds 1, so the amplified loss must be strictly larger
    Image2D r1(12, 12), r2(12, 12);
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = 0; c < 12; ++c) {
            r1.at(r, c) = 0.005 * double(c);
            r2.at(r, c) = 0.010 * double(c);
        }
    }
    const double plain = loss_grad_l1(r1, r2, false);
    const double amplified = loss_grad_l1(r1, r2, true);
    CHECK(plain > 0.0);
    CHECK(amplified > plain);
}

TEST_CASE("kspace mse equals pixel mse via Parseval", "[objectives]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto x = testutil::random_image(64, 64, 500 + seed);
        auto y = testutil::random_image(64, 64, 600 + seed);
        const double ks = kspace_mse(x, y, false);
        double mse = 0;
        for (std::size_t i = 0; i < x.v.size(); ++i) {
            const double d = x.v[i] - y.v[i];
            mse += d * d;
        }
        mse /= double(x.v.size());
        CHECK(std::abs(ks - mse) <= 1e-10 * mse);
    }
    auto x = testutil::random_image(16, 16, 1);
    CHECK(kspace_mse(x, x, false) == 0.0);
    CHECK(kspace_mse(x, x, true) == 0.0);
}

TEST_CASE("masked kspace loss converges to unmasked as sigma grows", "[objectives]") {
    auto x = testutil::random_image(64, 64, 71);
    auto y = testutil::random_image(64, 64, 72);
    const double unmasked = kspace_mse(x, y, false);
    const double masked = kspace_mse(x, y, true, 1e6);
    CHECK(std::abs(masked - unmasked) / unmasked < 1e-3);
    // a practical sigma strictly downweights low frequencies
    CHECK(kspace_mse(x, y, true, 32.0) < unmasked);
}

TEST_CASE("composite loss bookkeeping", "[objectives]") {
    auto x = testutil::random_image(32, 32, 81);
    auto y = testutil::random_image(32, 32, 82);

    // zero difference: only the charbonnier eps floor remains
    for (const char* preset : {"R2", "R3", "R4"}) {
        auto w = loss_preset(preset);
        auto b = composite_loss(x, x, w);
        CHECK(b.total == Catch::Approx(w.w_charbonnier * 1e-3).margin(1e-15));
        CHECK(b.ssim == 0.0);
        CHECK(b.kspace == 0.0);
        CHECK(b.grad == 0.0);
    }

    auto r3 = composite_loss(x, y, loss_preset("R3"));
    auto r4 = composite_loss(x, y, loss_preset("R4"));
    const auto w4 = loss_preset("R4");
    CHECK(std::abs(r4.total - (w4.w_charbonnier * r4.charbonnier + w4.w_ssim * r4.ssim +
                               w4.w_kspace * r4.kspace + w4.w_grad * r4.grad)) < 1e-10);
    // R3 and R4 differ only in the kspace and grad terms
    CHECK(r3.charbonnier == r4.charbonnier);
    CHECK(r3.ssim == r4.ssim);
    CHECK(r3.kspace != r4.kspace);
    CHECK(r3.grad != r4.grad);

    // R1 is exact pixel-wise L1
    auto r1 = composite_loss(x, y, loss_preset("R1"));
    double l1 = 0;
    for (std::size_t i = 0; i < x.v.size(); ++i) l1 += std::abs(x.v[i] - y.v[i]);
    l1 /= double(x.v.size());
    CHECK(r1.total == Catch::Approx(l1).epsilon(1e-14));

    CHECK_THROWS_AS(loss_preset("R9"), config_error);
    LossWeights all_zero{0, 0, 0, 0, false, false, 1e-3, 2.5, 32.0};
    CHECK_THROWS_AS(composite_loss(x, y, all_zero), config_error);
}

TEST_CASE("loss term gradients match finite differences", "[objectives]") {
    auto x = testutil::smooth_random_image(14, 14, 91);
    auto y = testutil::smooth_random_image(14, 14, 92);

    SECTION("charbonnier") {
        check_gradient(
            x, y, [&](const Image2D& p) { return charbonnier(p, y, 1e-3); },
            [&](Image2D& g) { charbonnier_backward(x, y, 1e-3, 1.0, g); }, 1e-5);
    }
    SECTION("ssim l1") {
        check_gradient(
            x, y, [&](const Image2D& p) { return loss_ssim_l1(p, y); },
            [&](Image2D& g) { loss_ssim_l1_backward(x, y, 1.0, g); }, 1e-4);
    }
    SECTION("kspace unmasked") {
        check_gradient(
            x, y, [&](const Image2D& p) { return kspace_mse(p, y, false); },
            [&](Image2D& g) { kspace_mse_backward(x, y, false, 32.0, 1.0, g); }, 1e-5);
    }
    SECTION("kspace masked") {
        check_gradient(
            x, y, [&](const Image2D& p) { return kspace_mse(p, y, true, 32.0); },
            [&](Image2D& g) { kspace_mse_backward(x, y, true, 32.0, 1.0, g); }, 1e-5);
    }
    SECTION("grad map plain") {
        check_gradient(
            x, y, [&](const Image2D& p) { return loss_grad_l1(p, y, false); },
            [&](Image2D& g) { loss_grad_l1_backward(x, y, false, 2.5, 1.0, g); }, 1e-4);
    }
    SECTION("grad map amplified") {
        check_gradient(
            x, y, [&](const Image2D& p) { return loss_grad_l1(p, y, true); },
            [&](Image2D& g) { loss_grad_l1_backward(x, y, true, 2.5, 1.0, g); }, 1e-4);
    }
    SECTION("composite R4") {
        auto w = loss_preset("R4");
        check_gradient(
            x, y, [&](const Image2D& p) { return composite_loss(p, y, w).total; },
            [&](Image2D& g) {
                auto full = composite_loss_grad(x, y, w);
                for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += full.v[i];
            },
            1e-4);
    }
}

TEST_CASE("psnr arithmetic and symmetry", "[objectives]") {
    Image2D x(8, 8, 0.5), y(8, 8, 0.6);
    CHECK(psnr(x, y) == Catch::Approx(20.0).margin(1e-10));  // uniform error 0.1
    CHECK(psnr(x, y) == psnr(y, x));
    CHECK(std::isinf(psnr(x, x)));
}

TEST_CASE("aggregate mean and population std", "[objectives]") {
    auto a = aggregate({1.0, 1.0, 1.0});
    CHECK(a.mean == 1.0);
    CHECK(a.stddev == 0.0);
    CHECK(format_mean_std(a) == "1.0000±0.0000");

    auto b = aggregate({0.0, 1.0});
    CHECK(b.mean == 0.5);
    CHECK(b.stddev == 0.5);

    auto c = aggregate({0.3, 0.9, 0.1});
    auto d = aggregate({0.9, 0.1, 0.3});
    CHECK(c.mean == d.mean);
    CHECK(c.stddev == d.stddev);

    CHECK_THROWS_AS(aggregate({1.0}), config_error);
}
