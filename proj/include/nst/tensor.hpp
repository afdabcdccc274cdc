#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nst {

/// Dense K x X x Y volume stored channel-major, then x, then y:
/// element (k, x, y) lives at ((k * width) + x) * height + y.
///
/// Viewed as a matrix, a volume is K rows of X*Y positions, which is the
/// linearization every Gram-style statistic works on.
class Volume {
  public:
    Volume() = default;
    Volume(std::size_t channels, std::size_t width, std::size_t height, double fill = 0.0);
    Volume(std::size_t channels, std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t positions() const noexcept { return width_ * height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t k, std::size_t x, std::size_t y) noexcept {
        return data_[(k * width_ + x) * height_ + y];
    }
    double operator()(std::size_t k, std::size_t x, std::size_t y) const noexcept {
        return data_[(k * width_ + x) * height_ + y];
    }

    std::span<double> channel(std::size_t k) noexcept {
        return {data_.data() + k * positions(), positions()};
    }
    std::span<const double> channel(std::size_t k) const noexcept {
        return {data_.data() + k * positions(), positions()};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::vector<double>& storage() noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    bool same_shape(const Volume& other) const noexcept {
        return channels_ == other.channels_ && width_ == other.width_ && height_ == other.height_;
    }

    Volume& operator+=(const Volume& other);
    Volume& operator-=(const Volume& other);
    Volume& operator*=(double scale) noexcept;

    friend bool operator==(const Volume&, const Volume&) = default;

  private:
    std::size_t channels_ = 0;
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

Volume operator+(Volume a, const Volume& b);
Volume operator-(Volume a, const Volume& b);
Volume operator*(double scale, Volume v);

/// Row-major dense matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
bool all_finite(std::span<const double> a) noexcept;

/// Nearest-neighbor replication: out(k, x, y) = in(k, x / fx, y / fy).
Volume nearest_upsample(const Volume& in, std::size_t fx, std::size_t fy);

/// Sum over each fx x fy block; the exact adjoint of nearest_upsample.
Volume block_sum_downsample(const Volume& in, std::size_t fx, std::size_t fy);

/// 3x3 box average with zero padding. Self-adjoint.
Volume box_blur(const Volume& in);
Volume box_blur(const Volume& in, int times);

/// out(k, x, y) = in(k, x + dx, y + dy), zero outside the grid.
/// spatial_shift(., -dx, -dy) is the adjoint of spatial_shift(., dx, dy).
Volume spatial_shift(const Volume& in, int dx, int dy);

/// Integer grid factors mapping `small` onto `large`; throws when they do not divide.
struct GridFactors {
    std::size_t fx;
    std::size_t fy;
};
GridFactors grid_factors(const Volume& large, const Volume& small);

}  // namespace nst
