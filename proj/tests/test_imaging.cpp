#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <jpeglib.h>

#include "nst/error.hpp"
#include "nst/imaging.hpp"
#include "test_util.hpp"

using namespace nst;
namespace fs = std::filesystem;

namespace {

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("nst_test_" + name); }

void write_png(const fs::path& path, std::uint32_t w, std::uint32_t h, std::uint32_t format,
               const std::vector<std::uint8_t>& pixels) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = w;
    img.height = h;
    img.format = format;
    REQUIRE(png_image_write_to_file(&img, path.c_str(), 0, pixels.data(), 0, nullptr) != 0);
}

void write_jpeg(const fs::path& path, int w, int h, const std::vector<std::uint8_t>& rgb) {
    jpeg_compress_struct c{};
    jpeg_error_mgr err{};
    c.err = jpeg_std_error(&err);
    jpeg_create_compress(&c);
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    jpeg_stdio_dest(&c, f);
    c.image_width = static_cast<JDIMENSION>(w);
    c.image_height = static_cast<JDIMENSION>(h);
    c.input_components = 3;
    c.in_color_space = JCS_RGB;
    jpeg_set_defaults(&c);
    jpeg_set_quality(&c, 95, TRUE);
    jpeg_start_compress(&c, TRUE);
    while (c.next_scanline < c.image_height) {
        auto* row = const_cast<JSAMPROW>(rgb.data() + c.next_scanline * static_cast<std::size_t>(w) * 3);
        jpeg_write_scanlines(&c, &row, 1);
    }
    jpeg_finish_compress(&c);
    jpeg_destroy_compress(&c);
    std::fclose(f);
}

std::vector<char> read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("png decode") {
    const auto red = temp("red.png");
    write_png(red, 1, 1, PNG_FORMAT_RGB, {255, 0, 0});
    const auto img = load_image(red);
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.data == std::vector<std::uint8_t>{255, 0, 0});

    const auto gray = temp("gray.png");
    write_png(gray, 2, 1, PNG_FORMAT_GRAY, {10, 200});
    CHECK(load_image(gray).data == std::vector<std::uint8_t>{10, 10, 10, 200, 200, 200});

    const auto alpha = temp("alpha.png");
    write_png(alpha, 2, 1, PNG_FORMAT_RGBA, {0, 0, 0, 0, 0, 0, 0, 255});
    CHECK(load_image(alpha).data == std::vector<std::uint8_t>{255, 255, 255, 0, 0, 0});

    for (const auto& p : {red, gray, alpha}) fs::remove(p);
}

TEST_CASE("png round trip and truncation") {
    std::mt19937_64 rng(1);
    PixelImage img(17, 9);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
    const auto path = temp("rt.png");
    save_png(path, img);
    CHECK(load_image(path) == img);

    auto bytes = read_all(path);
    bytes.resize(bytes.size() / 2);
    const auto cut = temp("cut.png");
    std::ofstream(cut, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_image(cut), IoError);
    CHECK_THROWS_AS(load_image(temp("does_not_exist.png")), IoError);
    try {
        load_image(cut);
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(cut.string()) != std::string::npos);
    }
    fs::remove(path);
    fs::remove(cut);
}

TEST_CASE("jpeg decode and truncation") {
    std::vector<std::uint8_t> rgb(16 * 16 * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = 200;
        rgb[i + 1] = 40;
        rgb[i + 2] = 90;
    }
    const auto path = temp("flat.jpg");
    write_jpeg(path, 16, 16, rgb);
    const auto img = load_image(path);
    CHECK(img.width == 16);
    CHECK(img.height == 16);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(std::abs(img.data[i] - rgb[i]) <= 3);

    auto bytes = read_all(path);
    bytes.resize(bytes.size() / 2);
    const auto cut = temp("cut.jpg");
    std::ofstream(cut, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_image(cut), IoError);
    fs::remove(path);
    fs::remove(cut);
}

TEST_CASE("not an image") {
    const auto path = temp("text.png");
    std::ofstream(path) << "hello";
    CHECK_THROWS_AS(load_image(path), IoError);
    fs::remove(path);
}

TEST_CASE("resize_bilinear") {
    std::mt19937_64 rng(2);
    PixelImage img(5, 4);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
    CHECK(resize_bilinear(img, 5, 4) == img);

    PixelImage ramp(2, 1);
    for (int c = 0; c < 3; ++c) ramp.at(1, 0, c) = 255;
    const auto wide = resize_bilinear(ramp, 4, 1);
    // Half-pixel centers: samples at 0.25, 0.75, 1.25, 1.75 source px, clamped to [0.5, 1.5] centers.
    CHECK(wide.at(0, 0, 0) == 0);
    CHECK(wide.at(1, 0, 0) == 64);
    CHECK(wide.at(2, 0, 0) == 191);
    CHECK(wide.at(3, 0, 0) == 255);

    PixelImage flat(3, 5, 77);
    CHECK(resize_bilinear(flat, 16, 11) == PixelImage(16, 11, 77));
}

TEST_CASE("resample_bilinear is linear") {
    std::mt19937_64 rng(3);
    const auto a = nst::testing::random_vector(rng, 20, 0, 255);
    const auto b = nst::testing::random_vector(rng, 20, 0, 255);
    std::vector<double> sum(20);
    for (std::size_t i = 0; i < 20; ++i) sum[i] = a[i] + b[i];
    const auto ra = resample_bilinear(a, 5, 4, 9, 7);
    const auto rb = resample_bilinear(b, 5, 4, 9, 7);
    const auto rs = resample_bilinear(sum, 5, 4, 9, 7);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        CHECK(rs[i] == doctest::Approx(ra[i] + rb[i]).epsilon(4e-16 * 8));
    }
}

TEST_CASE("preprocess and deprocess") {
    std::mt19937_64 rng(4);
    PixelImage img(4, 3);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
    const auto v = preprocess(img);
    CHECK(v.channels() == 3);
    CHECK(v.width() == 4);
    CHECK(v.height() == 3);
    // Network channel 0 is blue minus its mean.
    CHECK(v(0, 2, 1) == img.at(2, 1, 2) - 104.006);
    CHECK(v(2, 3, 0) == img.at(3, 0, 0) - 122.679);
    CHECK(deprocess(v) == img);

    PixelImage mean(2, 2);
    InputConvention integral;
    integral.mean = {10, 20, 30};
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) {
            mean.at(x, y, 0) = 30;
            mean.at(x, y, 1) = 20;
            mean.at(x, y, 2) = 10;
        }
    const auto zero = preprocess(mean, integral);
    for (double x : zero.data()) CHECK(x == 0.0);

    Volume wild(3, 1, 1, std::vector<double>{1e4, -1e4, 5.0});
    const auto clamped = deprocess(wild);
    CHECK(clamped.at(0, 0, 2) == 255);
    CHECK(clamped.at(0, 0, 1) == 0);
    CHECK(clamped.at(0, 0, 0) == 128);

    // Export is idempotent after one clamp.
    const auto noisy = nst::testing::random_volume(rng, 3, 4, 4, -300, 300);
    const auto once = preprocess(deprocess(noisy));
    CHECK(preprocess(deprocess(once)) == once);
}
