#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "mrir/image.hpp"
#include "mrir/phantom.hpp"

using namespace mrir;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto p = fs::temp_directory_path() / "mrir_imgcore_tests";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("normalize_unit maps extremes to 0 and 1", "[imgcore]") {
    Image2D img(1, 3);
    img.v = {0.25, 0.5, 1.0};
    auto out = normalize_unit(img);
    CHECK(out.v[0] == 0.0);
    CHECK(out.v[1] == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(out.v[2] == 1.0);

    Image2D two(1, 2);
    two.v = {0.0, 2.0};
    auto out2 = normalize_unit(two);
    CHECK(out2.v[0] == 0.0);
    CHECK(out2.v[1] == 1.0);
}

TEST_CASE("normalize_unit degenerate range yields zeros", "[imgcore]") {
    Image2D img(4, 4, 7.0);
    auto out = normalize_unit(img);
    for (double x : out.v) CHECK(x == 0.0);
}

TEST_CASE("normalize_unit rejects non-finite input", "[imgcore]") {
    Image2D img(2, 2, 0.5);
    img.v[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(normalize_unit(img), invalid_image_error);
}

TEST_CASE("normalize_unit is idempotent for non-degenerate images", "[imgcore]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto img = testutil::random_image(9, 13, seed, -3.0, 5.0);
        auto once = normalize_unit(img);
        auto twice = normalize_unit(once);
        REQUIRE(once.v == twice.v);  // bit-exact
    }
}

TEST_CASE("phantom generation is deterministic and in range", "[imgcore]") {
    PhantomSpec spec;
    spec.seed = 42;
    spec.size = 96;
    auto a = make_phantom(spec);
    auto b = make_phantom(spec);
    REQUIRE(a.v == b.v);
    CHECK(a.h == 96);
    CHECK(a.w == 96);
    double lo = 1e9, hi = -1e9;
    for (double x : a.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);

    spec.seed = 43;
    auto c = make_phantom(spec);
    CHECK(a.v != c.v);
}

TEST_CASE("zero-texture phantom concentrates gradient energy on edges", "[imgcore]") {
    PhantomSpec spec;
    spec.seed = 7;
    spec.size = 128;
    spec.texture_amplitude = 0.0;
    auto img = make_phantom(spec);

    // central-difference gradient magnitudes
    std::vector<double> g;
    g.reserve((img.h - 2) * (img.w - 2));
    for (std::size_t r = 1; r + 1 < img.h; ++r) {
        for (std::size_t c = 1; c + 1 < img.w; ++c) {
            const double gx = img.at(r, c + 1) - img.at(r, c - 1);
            const double gy = img.at(r + 1, c) - img.at(r - 1, c);
            g.push_back(gx * gx + gy * gy);
        }
    }
    auto sorted = g;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double total = 0, top = 0;
    for (double x : g) total += x;
    const std::size_t k = g.size() / 10;
    for (std::size_t i = 0; i < k; ++i) top += sorted[i];
    REQUIRE(total > 0);
    CHECK(top / total > 0.5);  // piecewise-smooth: sparse boundaries dominate
}

TEST_CASE("phantom spec validation", "[imgcore]") {
    PhantomSpec spec;
    spec.size = 8;
    CHECK_THROWS_AS(make_phantom(spec), config_error);
    spec.size = 64;
    spec.n_ellipses_min = 0;
    CHECK_THROWS_AS(make_phantom(spec), config_error);
}

TEST_CASE("MRIR raw round trip is bit identical", "[imgcore]") {
    auto dir = temp_dir();

    auto dbl = testutil::random_image(7, 5, 99, -1.0, 2.0);
    write_image(dbl, dir / "a.mrir", DType::f64);
    auto dbl_back = read_image<double>(dir / "a.mrir");
    REQUIRE(dbl_back.h == dbl.h);
    REQUIRE(dbl_back.w == dbl.w);
    REQUIRE(dbl_back.v == dbl.v);

    Image<float> flt(6, 9);
    Rng rng(5);
    for (auto& x : flt.v) x = static_cast<float>(rng.uniform());
    write_image(flt, dir / "b.mrir", DType::f32);
    auto flt_back = read_image<float>(dir / "b.mrir");
    REQUIRE(flt_back.v == flt.v);
}

TEST_CASE("MRIR header layout and payload size", "[imgcore]") {
    auto dir = temp_dir();
    Image2D img(2, 2);
    img.v = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    write_image(img, dir / "c.mrir", DType::f32);
    CHECK(fs::file_size(dir / "c.mrir") == 13 + 16);  // header + 4 x 4-byte values

    std::ifstream f(dir / "c.mrir", std::ios::binary);
    char head[13];
    f.read(head, 13);
    CHECK(std::string(head, 4) == "MRIR");
    CHECK(static_cast<unsigned char>(head[4]) == 2);   // width u32le
    CHECK(static_cast<unsigned char>(head[8]) == 2);   // height u32le
    CHECK(static_cast<unsigned char>(head[12]) == 0);  // f32 tag
}

TEST_CASE("MRIR format errors carry byte offsets", "[imgcore]") {
    auto dir = temp_dir();
    {
        std::ofstream f(dir / "bad.mrir", std::ios::binary);
        f << "NOPE1234567890";
    }
    CHECK_THROWS_AS(read_image<double>(dir / "bad.mrir"), format_error);

    {
        std::ofstream f(dir / "trunc.mrir", std::ios::binary);
        f << "MRIR";
        const char rest[] = {4, 0, 0, 0, 4, 0, 0, 0, 0};  // promises 4x4 f32, no payload
        f.write(rest, sizeof(rest));
    }
    try {
        read_image<double>(dir / "trunc.mrir");
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(e.offset == 13);
    }
}

TEST_CASE("PGM export writes big-endian 16-bit P5", "[imgcore]") {
    auto dir = temp_dir();
    Image2D img(1, 2);
    img.v = {0.0, 1.0};
    write_pgm16(img, dir / "t.pgm");

    std::ifstream f(dir / "t.pgm", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const std::string header = "P5\n2 1\n65535\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(bytes.compare(0, header.size(), header) == 0);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 0]) == 0);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 0);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 0xff);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 3]) == 0xff);
}
