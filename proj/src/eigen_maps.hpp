#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nst/tensor.hpp"

namespace nst::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// A volume viewed as a K x (X*Y) matrix.
inline MatrixMap as_matrix(Volume& v) {
    return {v.data().data(), static_cast<Eigen::Index>(v.channels()),
            static_cast<Eigen::Index>(v.positions())};
}
inline ConstMatrixMap as_matrix(const Volume& v) {
    return {v.data().data(), static_cast<Eigen::Index>(v.channels()),
            static_cast<Eigen::Index>(v.positions())};
}

inline MatrixMap as_matrix(std::span<double> data, std::size_t rows, std::size_t cols) {
    return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
inline ConstMatrixMap as_matrix(std::span<const double> data, std::size_t rows, std::size_t cols) {
    return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

inline MatrixMap as_matrix(std::vector<double>& data, std::size_t rows, std::size_t cols) {
    return as_matrix(std::span<double>(data), rows, cols);
}
inline ConstMatrixMap as_matrix(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    return as_matrix(std::span<const double>(data), rows, cols);
}

}  // namespace nst::detail
