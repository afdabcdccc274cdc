#include "nst/tensor.hpp"

#include <cmath>
#include <string>

#include "eigen_maps.hpp"
#include "nst/error.hpp"

namespace nst {

Volume::Volume(std::size_t channels, std::size_t width, std::size_t height, double fill)
    : channels_(channels), width_(width), height_(height), data_(channels * width * height, fill) {}

Volume::Volume(std::size_t channels, std::size_t width, std::size_t height, std::vector<double> data)
    : channels_(channels), width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != channels * width * height) {
        throw InvalidArgument("volume data length " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(channels) + "x" +
                              std::to_string(width) + "x" + std::to_string(height));
    }
}

Volume& Volume::operator+=(const Volume& other) {
    if (!same_shape(other)) throw InvalidArgument("volume shapes differ in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Volume& Volume::operator-=(const Volume& other) {
    if (!same_shape(other)) throw InvalidArgument("volume shapes differ in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Volume& Volume::operator*=(double scale) noexcept {
    for (double& v : data_) v *= scale;
    return *this;
}

Volume operator+(Volume a, const Volume& b) { return a += b; }
Volume operator-(Volume a, const Volume& b) { return a -= b; }
Volume operator*(double scale, Volume v) { return v *= scale; }

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw InvalidArgument("matrix data length mismatch");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidArgument("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                              std::to_string(b.rows()) + " disagree");
    }
    Matrix out(a.rows(), b.cols());
    if (a.cols() == 0) return out;
    detail::as_matrix(out.data(), out.rows(), out.cols()).noalias() =
        detail::as_matrix(a.data(), a.rows(), a.cols()) *
        detail::as_matrix(b.data(), b.rows(), b.cols());
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

bool all_finite(std::span<const double> a) noexcept {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Volume nearest_upsample(const Volume& in, std::size_t fx, std::size_t fy) {
    if (fx == 0 || fy == 0) throw InvalidArgument("nearest_upsample: zero factor");
    Volume out(in.channels(), in.width() * fx, in.height() * fy);
    for (std::size_t k = 0; k < out.channels(); ++k)
        for (std::size_t x = 0; x < out.width(); ++x)
            for (std::size_t y = 0; y < out.height(); ++y) out(k, x, y) = in(k, x / fx, y / fy);
    return out;
}

Volume block_sum_downsample(const Volume& in, std::size_t fx, std::size_t fy) {
    if (fx == 0 || fy == 0) throw InvalidArgument("block_sum_downsample: zero factor");
    if (in.width() % fx != 0 || in.height() % fy != 0) {
        throw InvalidArgument("block_sum_downsample: " + std::to_string(in.width()) + "x" +
                              std::to_string(in.height()) + " not divisible by " +
                              std::to_string(fx) + "x" + std::to_string(fy));
    }
    Volume out(in.channels(), in.width() / fx, in.height() / fy);
    for (std::size_t k = 0; k < in.channels(); ++k)
        for (std::size_t x = 0; x < in.width(); ++x)
            for (std::size_t y = 0; y < in.height(); ++y) out(k, x / fx, y / fy) += in(k, x, y);
    return out;
}

Volume box_blur(const Volume& in) {
    const auto w = static_cast<long>(in.width());
    const auto h = static_cast<long>(in.height());
    Volume out(in.channels(), in.width(), in.height());
    for (std::size_t k = 0; k < in.channels(); ++k) {
        for (long x = 0; x < w; ++x) {
            for (long y = 0; y < h; ++y) {
                double s = 0.0;
                for (long u = std::max(0L, x - 1); u <= std::min(w - 1, x + 1); ++u)
                    for (long v = std::max(0L, y - 1); v <= std::min(h - 1, y + 1); ++v)
                        s += in(k, u, v);
                out(k, x, y) = s / 9.0;
            }
        }
    }
    return out;
}

Volume box_blur(const Volume& in, int times) {
    if (times < 0) throw InvalidArgument("box_blur: negative repeat count");
    Volume out = in;
    for (int i = 0; i < times; ++i) out = box_blur(out);
    return out;
}

Volume spatial_shift(const Volume& in, int dx, int dy) {
    const auto w = static_cast<long>(in.width());
    const auto h = static_cast<long>(in.height());
    Volume out(in.channels(), in.width(), in.height());
    for (std::size_t k = 0; k < in.channels(); ++k) {
        for (long x = 0; x < w; ++x) {
            const long sx = x + dx;
            if (sx < 0 || sx >= w) continue;
            for (long y = 0; y < h; ++y) {
                const long sy = y + dy;
                if (sy < 0 || sy >= h) continue;
                out(k, x, y) = in(k, sx, sy);
            }
        }
    }
    return out;
}

GridFactors grid_factors(const Volume& large, const Volume& small) {
    if (small.width() == 0 || small.height() == 0 || large.width() % small.width() != 0 ||
        large.height() % small.height() != 0) {
        throw InvalidArgument("grid " + std::to_string(small.width()) + "x" +
                              std::to_string(small.height()) + " does not divide " +
                              std::to_string(large.width()) + "x" + std::to_string(large.height()));
    }
    return {large.width() / small.width(), large.height() / small.height()};
}

}  // namespace nst
