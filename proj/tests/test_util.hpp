#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nst/tensor.hpp"

namespace nst::testing {

inline Volume random_volume(std::mt19937_64& rng, std::size_t k, std::size_t w, std::size_t h, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Volume v(k, w, h);
    for (double& x : v.data()) x = dist(rng);
    return v;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    const double scale = std::max(max_abs(a), max_abs(b));
    return scale == 0.0 ? diff : diff / scale;
}

}  // namespace nst::testing
