#include "nst/statistics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "eigen_maps.hpp"
#include "nst/error.hpp"

namespace nst {

namespace {

using detail::as_matrix;
using detail::RowMatrix;

constexpr std::array<std::pair<StatisticKind, std::string_view>, 7> kKindNames{{
    {StatisticKind::PlainGram, "PlainGram"},
    {StatisticKind::ShiftedGram, "ShiftedGram"},
    {StatisticKind::InterLayer, "InterLayer"},
    {StatisticKind::AdjacentInterLayer, "AdjacentInterLayer"},
    {StatisticKind::Amplified, "Amplified"},
    {StatisticKind::ContentAware, "ContentAware"},
    {StatisticKind::GramCube, "GramCube"},
}};

constexpr std::array<std::pair<int, int>, 9> kOffsets{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

Volume shifted(const Volume& v, double s) {
    if (s == 0.0) return v;
    Volume out = v;
    for (double& x : out.data()) x += s;
    return out;
}

double effective_shift(StatisticKind kind, const StatisticParams& params) {
    return kind == StatisticKind::PlainGram ? 0.0 : params.shift;
}

// Fk brought onto Fl's grid: up, then blurred `blur_count` times.
Volume aligned_partner(const Volume& fl, const Volume& fk, int blur_count) {
    if (blur_count < 0) throw InvalidArgument("blur_count must be non-negative");
    const auto f = grid_factors(fl, fk);
    return box_blur(nearest_upsample(fk, f.fx, f.fy), blur_count);
}

// Adjoint of aligned_partner.
Volume unalign_gradient(const Volume& grad_aligned, const Volume& fl, const Volume& fk, int blur_count) {
    const auto f = grid_factors(fl, fk);
    return block_sum_downsample(box_blur(grad_aligned, blur_count), f.fx, f.fy);
}

// Copies the upper triangle of a k x k slice onto the lower one so that
// symmetric statistics are symmetric bit for bit.
void mirror_upper(std::span<double> slice, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j) slice[i * k + j] = slice[j * k + i];
}

GramStatistic make_stat(StatisticKind kind, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return {kind, std::move(shape), std::vector<double>(n, 0.0), 0};
}

void require_inputs(StatisticKind kind, std::span<const Volume* const> inputs) {
    if (inputs.size() != statistic_arity(kind)) {
        throw InvalidArgument(std::string(to_string(kind)) + " takes " + std::to_string(statistic_arity(kind)) +
                              " input volume(s), got " + std::to_string(inputs.size()));
    }
    for (const Volume* v : inputs) {
        if (v == nullptr || v->empty()) throw InvalidArgument(std::string(to_string(kind)) + ": empty input volume");
    }
}

void require_same_grid(const Volume& a, const Volume& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidArgument(std::string(what) + ": spatial sizes differ");
    }
}

Volume powered(const Volume& p, double power) {
    const bool integral = std::floor(power) == power;
    Volume out = p;
    for (double& x : out.data()) {
        if (x < 0.0 && !integral) throw InvalidArgument("amplified_gram: negative activation with non-integer power");
        x = std::pow(x, power);
    }
    return out;
}

GramStatistic gram_of(StatisticKind kind, const Volume& p) {
    auto stat = make_stat(kind, {p.channels(), p.channels()});
    const auto pm = as_matrix(p);
    as_matrix(stat.value, p.channels(), p.channels()).noalias() = pm * pm.transpose();
    mirror_upper(stat.value, p.channels());
    return stat;
}

GramStatistic interlayer_impl(const Volume& pl, const Volume& pk, int blur_count) {
    const Volume b = aligned_partner(pl, pk, blur_count);
    auto stat = make_stat(StatisticKind::InterLayer, {pl.channels(), pk.channels()});
    as_matrix(stat.value, pl.channels(), pk.channels()).noalias() = as_matrix(pl) * as_matrix(b).transpose();
    stat.blur_count = blur_count;
    return stat;
}

GramStatistic adjacent_impl(const Volume& pl, const Volume& pk, int blur_count) {
    const Volume b = aligned_partner(pl, pk, blur_count);
    const auto kl = pl.channels(), kk = pk.channels();
    auto stat = make_stat(StatisticKind::AdjacentInterLayer, {3, 3, kl, kk});
    for (std::size_t s = 0; s < kOffsets.size(); ++s) {
        const Volume bs = spatial_shift(b, kOffsets[s].first, kOffsets[s].second);
        std::span<double> block(stat.value.data() + s * kl * kk, kl * kk);
        as_matrix(block, kl, kk).noalias() = as_matrix(pl) * as_matrix(bs).transpose();
    }
    stat.blur_count = blur_count;
    return stat;
}

GramStatistic content_aware_impl(const Volume& p, const Volume& fc) {
    require_same_grid(p, fc, "content_aware_gram");
    const auto k = p.channels(), kc = fc.channels();
    auto stat = make_stat(StatisticKind::ContentAware, {kc, k, k});
    const auto pm = as_matrix(p);
    const auto cm = as_matrix(fc);
    RowMatrix weighted(pm.rows(), pm.cols());
    for (std::size_t c = 0; c < kc; ++c) {
        weighted = pm.array().rowwise() * cm.row(static_cast<Eigen::Index>(c)).array();
        std::span<double> slice(stat.value.data() + c * k * k, k * k);
        as_matrix(slice, k, k).noalias() = weighted * pm.transpose();
        mirror_upper(slice, k);
    }
    return stat;
}

GramStatistic cube_impl(const Volume& p) {
    const auto k = p.channels();
    auto stat = make_stat(StatisticKind::GramCube, {k, k, k});
    const auto pm = as_matrix(p);
    RowMatrix weighted(pm.rows(), pm.cols());
    for (std::size_t c = 0; c < k; ++c) {
        weighted = pm.array().rowwise() * pm.row(static_cast<Eigen::Index>(c)).array();
        std::span<double> slice(stat.value.data() + c * k * k, k * k);
        as_matrix(slice, k, k).noalias() = weighted * pm.transpose();
        mirror_upper(slice, k);
    }
    return stat;
}

}  // namespace

std::string_view to_string(StatisticKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "Unknown";
}

StatisticKind statistic_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    throw InvalidArgument("unknown statistic variant \"" + std::string(name) + "\"");
}

std::size_t statistic_arity(StatisticKind kind) noexcept {
    switch (kind) {
        case StatisticKind::InterLayer:
        case StatisticKind::AdjacentInterLayer:
        case StatisticKind::ContentAware:
            return 2;
        default:
            return 1;
    }
}

GramStatistic shifted_gram(const Volume& f, double shift) {
    return gram_of(shift == 0.0 ? StatisticKind::PlainGram : StatisticKind::ShiftedGram, shifted(f, shift));
}

GramStatistic interlayer_gram(const Volume& fl, const Volume& fk, int blur_count) {
    return interlayer_impl(fl, fk, blur_count);
}

GramStatistic adjacent_gram(const Volume& fl, const Volume& fk, int blur_count) {
    return adjacent_impl(fl, fk, blur_count);
}

GramStatistic amplified_gram(const Volume& f, double power) {
    if (!(power >= 1.0)) throw InvalidArgument("amplified_gram: power must be >= 1");
    return gram_of(StatisticKind::Amplified, powered(f, power));
}

GramStatistic content_aware_gram(const Volume& fl, const Volume& fc) { return content_aware_impl(fl, fc); }

GramStatistic gram_cube(const Volume& f) { return cube_impl(f); }

GramStatistic evaluate_statistic(StatisticKind kind, const StatisticParams& params,
                                 std::span<const Volume* const> inputs) {
    require_inputs(kind, inputs);
    const double s = effective_shift(kind, params);
    switch (kind) {
        case StatisticKind::PlainGram:
        case StatisticKind::ShiftedGram: {
            auto stat = gram_of(kind, shifted(*inputs[0], s));
            return stat;
        }
        case StatisticKind::InterLayer:
            return interlayer_impl(shifted(*inputs[0], s), shifted(*inputs[1], s), params.blur_count);
        case StatisticKind::AdjacentInterLayer:
            return adjacent_impl(shifted(*inputs[0], s), shifted(*inputs[1], s), params.blur_count);
        case StatisticKind::Amplified:
            return amplified_gram(shifted(*inputs[0], s), params.power);
        case StatisticKind::ContentAware:
            return content_aware_impl(shifted(*inputs[0], s), *inputs[1]);
        case StatisticKind::GramCube:
            return cube_impl(shifted(*inputs[0], s));
    }
    throw InvalidArgument("unhandled statistic kind");
}

std::vector<Volume> statistic_vjp(StatisticKind kind, const StatisticParams& params,
                                  std::span<const Volume* const> inputs, std::span<const double> upstream) {
    require_inputs(kind, inputs);
    const double s = effective_shift(kind, params);
    const Volume p = shifted(*inputs[0], s);
    const auto k = p.channels();

    auto require_upstream = [&](std::size_t expected) {
        if (upstream.size() != expected) {
            throw InvalidArgument(std::string(to_string(kind)) + " vjp: upstream has " +
                                  std::to_string(upstream.size()) + " entries, expected " + std::to_string(expected));
        }
    };

    switch (kind) {
        case StatisticKind::PlainGram:
        case StatisticKind::ShiftedGram: {
            require_upstream(k * k);
            const auto u = as_matrix(upstream, k, k);
            Volume grad(p.channels(), p.width(), p.height());
            as_matrix(grad).noalias() = (u + u.transpose()) * as_matrix(p);
            return {std::move(grad)};
        }
        case StatisticKind::Amplified: {
            if (!(params.power >= 1.0)) throw InvalidArgument("amplified_gram: power must be >= 1");
            require_upstream(k * k);
            const Volume q = powered(p, params.power);
            const Volume dq_dp = params.power * powered(p, params.power - 1.0);
            const auto u = as_matrix(upstream, k, k);
            Volume grad(p.channels(), p.width(), p.height());
            as_matrix(grad).noalias() = (u + u.transpose()) * as_matrix(q);
            as_matrix(grad).array() *= as_matrix(dq_dp).array();
            return {std::move(grad)};
        }
        case StatisticKind::InterLayer:
        case StatisticKind::AdjacentInterLayer: {
            const Volume pk = shifted(*inputs[1], s);
            const auto kk = pk.channels();
            const Volume b = aligned_partner(p, pk, params.blur_count);
            Volume grad_l(p.channels(), p.width(), p.height());
            Volume grad_b(b.channels(), b.width(), b.height());
            if (kind == StatisticKind::InterLayer) {
                require_upstream(k * kk);
                const auto u = as_matrix(upstream, k, kk);
                as_matrix(grad_l).noalias() = u * as_matrix(b);
                as_matrix(grad_b).noalias() = u.transpose() * as_matrix(p);
            } else {
                require_upstream(9 * k * kk);
                Volume tmp(b.channels(), b.width(), b.height());
                for (std::size_t o = 0; o < kOffsets.size(); ++o) {
                    const auto [dx, dy] = kOffsets[o];
                    const auto u = as_matrix(upstream.subspan(o * k * kk, k * kk), k, kk);
                    as_matrix(grad_l).noalias() += u * as_matrix(spatial_shift(b, dx, dy));
                    as_matrix(tmp).noalias() = u.transpose() * as_matrix(p);
                    grad_b += spatial_shift(tmp, -dx, -dy);
                }
            }
            return {std::move(grad_l), unalign_gradient(grad_b, p, pk, params.blur_count)};
        }
        case StatisticKind::ContentAware: {
            const Volume& fc = *inputs[1];
            require_same_grid(p, fc, "content_aware_gram");
            const auto kc = fc.channels();
            require_upstream(kc * k * k);
            const auto pm = as_matrix(p);
            const auto cm = as_matrix(fc);
            Volume grad_l(p.channels(), p.width(), p.height());
            Volume grad_c(fc.channels(), fc.width(), fc.height());
            auto gl = as_matrix(grad_l);
            auto gc = as_matrix(grad_c);
            RowMatrix up(pm.rows(), pm.cols());
            for (std::size_t c = 0; c < kc; ++c) {
                const auto u = as_matrix(upstream.subspan(c * k * k, k * k), k, k);
                const auto row = static_cast<Eigen::Index>(c);
                up.noalias() = u * pm;
                gc.row(row) = (pm.array() * up.array()).colwise().sum();
                up.noalias() += u.transpose() * pm;
                gl.array() += up.array().rowwise() * cm.row(row).array();
            }
            return {std::move(grad_l), std::move(grad_c)};
        }
        case StatisticKind::GramCube: {
            require_upstream(k * k * k);
            const auto pm = as_matrix(p);
            Volume grad(p.channels(), p.width(), p.height());
            auto g = as_matrix(grad);
            RowMatrix tmp(pm.rows(), pm.cols());
            for (std::size_t c = 0; c < k; ++c) {
                const auto u = as_matrix(upstream.subspan(c * k * k, k * k), k, k);
                const auto row = static_cast<Eigen::Index>(c);
                // index c in either correlated slot
                tmp.noalias() = (u + u.transpose()) * pm;
                g.array() += tmp.array().rowwise() * pm.row(row).array();
                // index c as the weighting slot
                tmp.noalias() = u * pm;
                g.row(row).array() += (pm.array() * tmp.array()).colwise().sum();
            }
            return {std::move(grad)};
        }
    }
    throw InvalidArgument("unhandled statistic kind");
}

StatisticExtent statistic_extent(StatisticKind kind, std::span<const Volume* const> inputs) {
    require_inputs(kind, inputs);
    const Volume& f = *inputs[0];
    const auto k = f.channels();
    switch (kind) {
        case StatisticKind::InterLayer:
        case StatisticKind::AdjacentInterLayer:
            return {f.positions(), k * inputs[1]->channels()};
        case StatisticKind::ContentAware:
            return {f.positions(), inputs[1]->channels() * k * k};
        case StatisticKind::GramCube:
            return {f.positions(), k * k * k};
        default:
            return {f.positions(), k * k};
    }
}

}  // namespace nst
