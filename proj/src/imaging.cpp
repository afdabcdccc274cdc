#include "nst/imaging.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "nst/error.hpp"

namespace nst {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PixelImage decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
        throw IoError("cannot decode PNG " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, rgba.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    PixelImage out(img.width, img.height);
    for (std::size_t p = 0; p < out.width * out.height; ++p) {
        const unsigned a = rgba[4 * p + 3];
        for (std::size_t c = 0; c < 3; ++c) {
            const unsigned v = rgba[4 * p + c];
            // Composite over white, rounded.
            out.data[3 * p + c] = static_cast<std::uint8_t>((v * a + 255u * (255u - a) + 127u) / 255u);
        }
    }
    return out;
}

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void jpeg_message(j_common_ptr cinfo, int level) {
    // Warnings (level -1) include premature end of data; treat them as fatal.
    if (level < 0) jpeg_fail(cinfo);
}

PixelImage decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    jpeg_decompress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_fail;
    err.mgr.emit_message = jpeg_message;
    PixelImage out;
    std::vector<std::uint8_t>* pixels = &out.data;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("cannot decode JPEG " + path.string() + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    out.width = cinfo.output_width;
    out.height = cinfo.output_height;
    pixels->resize(out.width * out.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

}  // namespace

PixelImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    static constexpr std::uint8_t png_sig[] = {0x89, 'P', 'N', 'G'};
    if (bytes.size() >= 4 && std::equal(std::begin(png_sig), std::end(png_sig), bytes.begin())) {
        return decode_png(bytes, path);
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes, path);
    throw IoError("unrecognized image format: " + path.string());
}

void save_png(const std::filesystem::path& path, const PixelImage& image) {
    if (image.data.size() != image.width * image.height * 3 || image.width == 0 || image.height == 0) {
        throw InvalidArgument("save_png: malformed image");
    }
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.data.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + img.message);
    }
}

std::vector<double> resample_bilinear(std::span<const double> plane, std::size_t width, std::size_t height,
                                      std::size_t new_width, std::size_t new_height) {
    if (plane.size() != width * height || width == 0 || height == 0) {
        throw InvalidArgument("resample_bilinear: plane size mismatch");
    }
    if (new_width == 0 || new_height == 0) throw InvalidArgument("resample_bilinear: target size must be >= 1");
    struct Tap {
        std::size_t lo, hi;
        double t;
    };
    auto taps = [](std::size_t from, std::size_t to) {
        std::vector<Tap> out(to);
        const double scale = static_cast<double>(from) / static_cast<double>(to);
        for (std::size_t i = 0; i < to; ++i) {
            const double s = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(from - 1));
            const auto lo = static_cast<std::size_t>(std::floor(s));
            out[i] = {lo, std::min(lo + 1, from - 1), s - static_cast<double>(lo)};
        }
        return out;
    };
    const auto tx = taps(width, new_width);
    const auto ty = taps(height, new_height);
    std::vector<double> out(new_width * new_height);
    for (std::size_t y = 0; y < new_height; ++y) {
        const auto& vy = ty[y];
        for (std::size_t x = 0; x < new_width; ++x) {
            const auto& vx = tx[x];
            const double top = (1 - vx.t) * plane[vy.lo * width + vx.lo] + vx.t * plane[vy.lo * width + vx.hi];
            const double bottom = (1 - vx.t) * plane[vy.hi * width + vx.lo] + vx.t * plane[vy.hi * width + vx.hi];
            out[y * new_width + x] = (1 - vy.t) * top + vy.t * bottom;
        }
    }
    return out;
}

PixelImage resize_bilinear(const PixelImage& image, std::size_t width, std::size_t height) {
    if (width == image.width && height == image.height) return image;
    PixelImage out(width, height);
    std::vector<double> plane(image.width * image.height);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = image.data[3 * p + c];
        const auto resized = resample_bilinear(plane, image.width, image.height, width, height);
        for (std::size_t p = 0; p < resized.size(); ++p) out.data[3 * p + c] = to_byte(resized[p]);
    }
    return out;
}

Volume preprocess(const PixelImage& image, const InputConvention& convention) {
    Volume v(3, image.width, image.height);
    for (std::size_t c = 0; c < 3; ++c) {
        const auto src = static_cast<std::size_t>(convention.channel_order[c]);
        for (std::size_t x = 0; x < image.width; ++x)
            for (std::size_t y = 0; y < image.height; ++y) v(c, x, y) = image.at(x, y, src) - convention.mean[c];
    }
    return v;
}

PixelImage deprocess(const Volume& volume, const InputConvention& convention) {
    if (volume.channels() != 3) throw InvalidArgument("deprocess: volume must have 3 channels");
    PixelImage img(volume.width(), volume.height());
    for (std::size_t c = 0; c < 3; ++c) {
        const auto dst = static_cast<std::size_t>(convention.channel_order[c]);
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t y = 0; y < img.height; ++y) img.at(x, y, dst) = to_byte(volume(c, x, y) + convention.mean[c]);
    }
    return img;
}

}  // namespace nst
