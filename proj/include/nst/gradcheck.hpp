#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nst/network.hpp"
#include "nst/statistics.hpp"

namespace nst {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps), one coordinate at a time.
std::vector<double> finite_difference_grad(const ScalarFunction& f, std::span<const double> x, double eps = 1e-5);

/// max_i |a_i - n_i| / max(||a||_inf, ||n||_inf); 0 when both vectors vanish.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

using VjpFunction = std::function<std::vector<Volume>(StatisticKind, const StatisticParams&,
                                                      std::span<const Volume* const>, std::span<const double>)>;

struct GradcheckEntry {
    std::string name;
    double max_relative_error = 0.0;
    bool passed = false;
};

struct GradcheckReport {
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::vector<GradcheckEntry> entries;

    bool passed() const noexcept;
    std::string text() const;
    nlohmann::json json() const;
};

/// Compares `vjp` with finite differences of <U, value(inputs)> for every
/// statistic kind on random inputs and a random upstream U.
GradcheckReport check_all_statistics(std::uint64_t seed, const VjpFunction& vjp = statistic_vjp,
                                     double tolerance = 1e-6);

/// Preset families exercised end to end on a toy network.
const std::vector<std::string>& gradcheck_families();

/// Checks total_loss_grad against finite differences on a toy network with an
/// 8x8 input for each named preset family.
GradcheckReport check_preset_families(std::uint64_t seed, double tolerance = 1e-5);

}  // namespace nst
