#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "nst/tensor.hpp"

namespace nst {

enum class StatisticKind {
    PlainGram,
    ShiftedGram,
    InterLayer,
    AdjacentInterLayer,
    Amplified,
    ContentAware,
    GramCube,
};

std::string_view to_string(StatisticKind kind) noexcept;
StatisticKind statistic_kind_from_string(std::string_view name);

/// Number of activation volumes a statistic consumes: 2 for the layer-pair
/// kinds and ContentAware (style layer, content layer), 1 otherwise.
std::size_t statistic_arity(StatisticKind kind) noexcept;

/// Free parameters of a statistic. `shift` is added to the style activations
/// before correlating (never to the content weighting map of ContentAware);
/// `blur_count` applies to InterLayer and AdjacentInterLayer; `power` to Amplified.
struct StatisticParams {
    double shift = 0.0;
    int blur_count = 0;
    double power = 1.0;
};

/// Raw (unnormalized) statistic value.
///
/// Layouts, all row-major over `shape`:
///   PlainGram / ShiftedGram / Amplified  K x K
///   InterLayer                           K_l x K_k
///   AdjacentInterLayer                   3 x 3 x K_l x K_k, offset (dx, dy) at [dx + 1][dy + 1]
///   ContentAware                         K_c x K_l x K_l
///   GramCube                             K x K x K, entry [k][i][j] = sum F_i F_j F_k
struct GramStatistic {
    StatisticKind kind = StatisticKind::PlainGram;
    std::vector<std::size_t> shape;
    std::vector<double> value;
    int blur_count = 0;

    std::size_t size() const noexcept { return value.size(); }
};

/// (F + s)(F + s)^T over the K x (X*Y) linearization.
GramStatistic shifted_gram(const Volume& f, double shift);

/// F_l [blur^n(up(F_k))]^T. F_k's grid must divide F_l's.
GramStatistic interlayer_gram(const Volume& fl, const Volume& fk, int blur_count);

/// InterLayer correlations at the nine offsets (dx, dy) in {-1, 0, 1}^2 with
/// zero padding: block (dx, dy) is F_l shift(blur^n(up(F_k)), dx, dy)^T.
GramStatistic adjacent_gram(const Volume& fl, const Volume& fk, int blur_count = 0);

/// F^p (F^p)^T with element-wise power p >= 1.
GramStatistic amplified_gram(const Volume& f, double power);

/// Slice k is sum over positions of F_i * F_j * Fc_k. Fc must already sit on F's grid.
GramStatistic content_aware_gram(const Volume& fl, const Volume& fc);

/// Triple correlations (F_i . F_j) F_k^T.
GramStatistic gram_cube(const Volume& f);

/// Evaluates any statistic kind on its inputs (see statistic_arity).
GramStatistic evaluate_statistic(StatisticKind kind, const StatisticParams& params,
                                 std::span<const Volume* const> inputs);

/// Vector-Jacobian product: the gradient of <upstream, value(inputs)> with
/// respect to each input volume, in input order.
std::vector<Volume> statistic_vjp(StatisticKind kind, const StatisticParams& params,
                                  std::span<const Volume* const> inputs, std::span<const double> upstream);

/// Activation grid and channel counts that a statistic is defined over; used
/// for loss normalization.
struct StatisticExtent {
    std::size_t positions = 0;
    std::size_t channel_product = 0;
};
StatisticExtent statistic_extent(StatisticKind kind, std::span<const Volume* const> inputs);

}  // namespace nst
