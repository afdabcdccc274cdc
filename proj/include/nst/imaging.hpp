#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nst/network.hpp"
#include "nst/tensor.hpp"

namespace nst {

/// 8-bit RGB image, row-major, pixels interleaved.
struct PixelImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data;  // width * height * 3

    PixelImage() = default;
    PixelImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), data(w * h * 3, fill) {}

    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) noexcept { return data[(y * width + x) * 3 + c]; }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const noexcept {
        return data[(y * width + x) * 3 + c];
    }

    friend bool operator==(const PixelImage&, const PixelImage&) = default;
};

/// Decodes PNG or JPEG (sniffed from the content). Alpha is composited over
/// white; grayscale is replicated to three channels.
PixelImage load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const PixelImage& image);

/// Bilinear resampling of a single plane (row-major, width x height) with
/// pixel-center alignment and edge clamping.
std::vector<double> resample_bilinear(std::span<const double> plane, std::size_t width, std::size_t height,
                                      std::size_t new_width, std::size_t new_height);

PixelImage resize_bilinear(const PixelImage& image, std::size_t width, std::size_t height);

/// Network input volume: channels reordered per the convention, mean subtracted.
/// Volume x runs along image columns, y along rows.
Volume preprocess(const PixelImage& image, const InputConvention& convention = {});

/// Inverse of preprocess, then clamped to [0, 255] and rounded.
PixelImage deprocess(const Volume& volume, const InputConvention& convention = {});

}  // namespace nst
