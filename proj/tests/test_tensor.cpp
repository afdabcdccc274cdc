#include <doctest.h>

#include "nst/error.hpp"
#include "nst/tensor.hpp"
#include "test_util.hpp"

using namespace nst;
using nst::testing::random_volume;

namespace {

Volume from_rows(std::size_t k, std::size_t w, std::size_t h, std::vector<double> data) {
    return Volume(k, w, h, std::move(data));
}

}  // namespace

TEST_CASE("volume layout is channel, then x, then y") {
    Volume v(2, 3, 4);
    v(1, 2, 3) = 7.0;
    CHECK(v.data()[(1 * 3 + 2) * 4 + 3] == 7.0);
    CHECK(v.size() == 24);
    CHECK_THROWS_AS(Volume(1, 2, 2, std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("matmul") {
    CHECK(matmul(Matrix::identity(2), Matrix::identity(2)) == Matrix::identity(2));
    const Matrix a(2, 2, {1, 2, 0, 1});
    const Matrix b(2, 1, {1, 1});
    CHECK(matmul(a, b) == Matrix(2, 1, {3, 1}));
    std::mt19937_64 rng(3);
    Matrix any(3, 4, nst::testing::random_vector(rng, 12));
    CHECK(matmul(Matrix(2, 3), any) == Matrix(2, 4));
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), InvalidArgument);
}

TEST_CASE("nearest_upsample") {
    const auto up = nearest_upsample(from_rows(1, 1, 1, {5}), 2, 2);
    CHECK(up == Volume(1, 2, 2, 5.0));
    CHECK(nearest_upsample(from_rows(1, 1, 2, {1, 2}), 1, 2) == from_rows(1, 1, 4, {1, 1, 2, 2}));
    std::mt19937_64 rng(1);
    const auto r = random_volume(rng, 2, 3, 3);
    CHECK(nearest_upsample(r, 1, 1) == r);
    CHECK_THROWS_AS(nearest_upsample(r, 0, 1), InvalidArgument);
}

TEST_CASE("block_sum_downsample") {
    CHECK(block_sum_downsample(Volume(1, 2, 2, 1.0), 2, 2) == from_rows(1, 1, 1, {4}));
    std::mt19937_64 rng(2);
    const auto r = random_volume(rng, 2, 4, 4);
    CHECK(block_sum_downsample(r, 1, 1) == r);
    CHECK_THROWS_AS(block_sum_downsample(r, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(block_sum_downsample(r, 0, 1), InvalidArgument);

    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_volume(rng, 1, 2, 2);
        const auto b = random_volume(rng, 1, 4, 4);
        CHECK(dot(nearest_upsample(a, 2, 2).data(), b.data()) ==
              doctest::Approx(dot(a.data(), block_sum_downsample(b, 2, 2).data())).epsilon(1e-12));
    }
}

TEST_CASE("up then down scales a constant by fx*fy") {
    for (std::size_t fx = 1; fx <= 3; ++fx)
        for (std::size_t fy = 1; fy <= 3; ++fy) {
            const Volume c(2, 3, 2, 1.75);
            CHECK(block_sum_downsample(nearest_upsample(c, fx, fy), fx, fy) ==
                  Volume(2, 3, 2, 1.75 * static_cast<double>(fx * fy)));
        }
}

TEST_CASE("box_blur") {
    CHECK(box_blur(from_rows(1, 1, 1, {9}))(0, 0, 0) == doctest::Approx(1.0));
    const auto b = box_blur(Volume(1, 2, 2, 1.0));
    for (double x : b.data()) CHECK(x == doctest::Approx(4.0 / 9.0));
    CHECK(box_blur(Volume(2, 3, 3)) == Volume(2, 3, 3));
    CHECK(box_blur(Volume(1, 3, 3, 2.0), 0) == Volume(1, 3, 3, 2.0));
}

TEST_CASE("box_blur is linear and self-adjoint") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_volume(rng, 2, 5, 5);
        const auto b = random_volume(rng, 2, 5, 5);
        const double alpha = 0.7, beta = -1.3;
        const auto lhs = box_blur(alpha * a + beta * b);
        const auto rhs = alpha * box_blur(a) + beta * box_blur(b);
        CHECK(nst::testing::max_rel_diff(lhs.data(), rhs.data()) < 1e-12);
        CHECK(dot(box_blur(a).data(), b.data()) == doctest::Approx(dot(a.data(), box_blur(b).data())).epsilon(1e-12));
    }
}

TEST_CASE("spatial_shift") {
    std::mt19937_64 rng(5);
    const auto r = random_volume(rng, 2, 3, 4);
    CHECK(spatial_shift(r, 0, 0) == r);
    // [[1,2],[3,4]] with the outer index as x.
    CHECK(spatial_shift(from_rows(1, 2, 2, {1, 2, 3, 4}), 1, 0) == from_rows(1, 2, 2, {3, 4, 0, 0}));
    CHECK(spatial_shift(r, 3, 0) == Volume(2, 3, 4));
    CHECK(spatial_shift(r, 0, -4) == Volume(2, 3, 4));

    for (int dx = -2; dx <= 2; ++dx)
        for (int dy = -2; dy <= 2; ++dy) {
            const auto a = random_volume(rng, 2, 4, 3);
            const auto b = random_volume(rng, 2, 4, 3);
            CHECK(dot(spatial_shift(a, dx, dy).data(), b.data()) ==
                  doctest::Approx(dot(a.data(), spatial_shift(b, -dx, -dy).data())).epsilon(1e-12));
        }
}

TEST_CASE("grid_factors") {
    const auto f = grid_factors(Volume(1, 8, 4), Volume(1, 2, 2));
    CHECK(f.fx == 4);
    CHECK(f.fy == 2);
    CHECK_THROWS_AS(grid_factors(Volume(1, 5, 4), Volume(1, 2, 2)), InvalidArgument);
}

TEST_CASE("arithmetic and finiteness") {
    Volume a(1, 1, 2, std::vector<double>{1, 2});
    Volume b(1, 1, 2, std::vector<double>{3, 5});
    CHECK(a + b == Volume(1, 1, 2, std::vector<double>{4, 7}));
    CHECK(b - a == Volume(1, 1, 2, std::vector<double>{2, 3}));
    CHECK_THROWS_AS(a += Volume(1, 2, 2), InvalidArgument);
    CHECK(all_finite(a.data()));
    a(0, 0, 1) = std::nan("");
    CHECK_FALSE(all_finite(a.data()));
    CHECK(squared_norm(b.data()) == 34.0);
}
