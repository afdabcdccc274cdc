#include "nst/network.hpp"

#include <algorithm>
#include <random>

#include "eigen_maps.hpp"
#include "nst/error.hpp"

namespace nst {

const std::vector<LayerSpec>& vgg19_layers() {
    static const std::vector<LayerSpec> layers = [] {
        struct Block {
            int convs;
            std::size_t channels;
        };
        constexpr Block blocks[] = {{2, 64}, {2, 128}, {4, 256}, {4, 512}, {4, 512}};
        std::vector<LayerSpec> out;
        std::size_t in = 3;
        int index = 1;
        for (int b = 0; b < 5; ++b) {
            for (int c = 1; c <= blocks[b].convs; ++c) {
                out.push_back({"conv" + std::to_string(b + 1) + "_" + std::to_string(c), index++, in,
                               blocks[b].channels, c == blocks[b].convs && b < 4});
                in = blocks[b].channels;
            }
        }
        return out;
    }();
    return layers;
}

std::optional<std::size_t> NetworkWeights::find(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].spec.name == name) return i;
    }
    return std::nullopt;
}

const ConvLayer& NetworkWeights::layer(std::string_view name) const {
    auto i = find(name);
    if (!i) throw InvalidArgument("network has no layer " + std::string(name));
    return layers[*i];
}

std::vector<LayerSpec> NetworkWeights::specs() const {
    std::vector<LayerSpec> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back(l.spec);
    return out;
}

void ActivationSet::add(std::string name, Volume volume) {
    names_.push_back(std::move(name));
    volumes_.push_back(std::move(volume));
}

bool ActivationSet::contains(std::string_view name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Volume& ActivationSet::at(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InvalidArgument("no recorded activation for " + std::string(name));
    return volumes_[static_cast<std::size_t>(it - names_.begin())];
}

namespace {

// The O x I slice of the kernel at tap (ky, kx).
detail::RowMatrix kernel_tap(const ConvLayer& layer, std::size_t ky, std::size_t kx) {
    const auto out_c = layer.spec.out_channels;
    const auto in_c = layer.spec.in_channels;
    detail::RowMatrix tap(static_cast<Eigen::Index>(out_c), static_cast<Eigen::Index>(in_c));
    for (std::size_t o = 0; o < out_c; ++o)
        for (std::size_t i = 0; i < in_c; ++i)
            tap(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) = layer.weight(o, i, ky, kx);
    return tap;
}

void check_layer(const ConvLayer& layer) {
    const auto& s = layer.spec;
    if (layer.kernel.size() != s.out_channels * s.in_channels * 9 || layer.bias.size() != s.out_channels) {
        throw InvalidArgument("layer " + s.name + " has inconsistent kernel or bias size");
    }
}

void relu_inplace(Volume& v) {
    for (double& x : v.data()) x = std::max(x, 0.0);
}

}  // namespace

Volume conv3x3_forward(const Volume& in, const ConvLayer& layer) {
    check_layer(layer);
    if (in.channels() != layer.spec.in_channels) {
        throw InvalidArgument("conv " + layer.spec.name + ": input has " + std::to_string(in.channels()) +
                              " channels, kernel expects " + std::to_string(layer.spec.in_channels));
    }
    Volume out(layer.spec.out_channels, in.width(), in.height());
    auto out_m = detail::as_matrix(out);
    for (std::size_t o = 0; o < layer.spec.out_channels; ++o) {
        out_m.row(static_cast<Eigen::Index>(o)).setConstant(layer.bias[o]);
    }
    for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
            const int dx = static_cast<int>(kx) - 1;
            const int dy = static_cast<int>(ky) - 1;
            const Volume shifted = spatial_shift(in, dx, dy);
            out_m.noalias() += kernel_tap(layer, ky, kx) * detail::as_matrix(shifted);
        }
    }
    return out;
}

Volume conv3x3_backward(const Volume& grad_out, const ConvLayer& layer) {
    check_layer(layer);
    if (grad_out.channels() != layer.spec.out_channels) {
        throw InvalidArgument("conv backward " + layer.spec.name + ": gradient channel mismatch");
    }
    Volume grad_in(layer.spec.in_channels, grad_out.width(), grad_out.height());
    Volume tap_grad(layer.spec.in_channels, grad_out.width(), grad_out.height());
    for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
            const int dx = static_cast<int>(kx) - 1;
            const int dy = static_cast<int>(ky) - 1;
            detail::as_matrix(tap_grad).noalias() =
                kernel_tap(layer, ky, kx).transpose() * detail::as_matrix(grad_out);
            grad_in += spatial_shift(tap_grad, -dx, -dy);
        }
    }
    return grad_in;
}

Volume pool2x2_forward(const Volume& in, PoolingMode mode) {
    if (in.width() % 2 != 0 || in.height() % 2 != 0) {
        throw InvalidArgument("pooling needs even spatial size, got " + std::to_string(in.width()) + "x" +
                              std::to_string(in.height()));
    }
    Volume out(in.channels(), in.width() / 2, in.height() / 2);
    for (std::size_t k = 0; k < out.channels(); ++k) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            for (std::size_t y = 0; y < out.height(); ++y) {
                const double a = in(k, 2 * x, 2 * y);
                const double b = in(k, 2 * x, 2 * y + 1);
                const double c = in(k, 2 * x + 1, 2 * y);
                const double d = in(k, 2 * x + 1, 2 * y + 1);
                out(k, x, y) = mode == PoolingMode::Average ? 0.25 * (a + b + c + d)
                                                            : std::max({a, b, c, d});
            }
        }
    }
    return out;
}

Volume pool2x2_backward(const Volume& grad_out, const Volume& pool_input, PoolingMode mode) {
    if (pool_input.width() != 2 * grad_out.width() || pool_input.height() != 2 * grad_out.height() ||
        pool_input.channels() != grad_out.channels()) {
        throw InvalidArgument("pool backward: shape mismatch");
    }
    Volume grad_in(pool_input.channels(), pool_input.width(), pool_input.height());
    for (std::size_t k = 0; k < grad_out.channels(); ++k) {
        for (std::size_t x = 0; x < grad_out.width(); ++x) {
            for (std::size_t y = 0; y < grad_out.height(); ++y) {
                const double g = grad_out(k, x, y);
                if (mode == PoolingMode::Average) {
                    for (std::size_t a = 0; a < 2; ++a)
                        for (std::size_t b = 0; b < 2; ++b) grad_in(k, 2 * x + a, 2 * y + b) += 0.25 * g;
                    continue;
                }
                // First maximum in scan order takes the whole gradient.
                std::size_t best_a = 0, best_b = 0;
                double best = pool_input(k, 2 * x, 2 * y);
                for (std::size_t a = 0; a < 2; ++a) {
                    for (std::size_t b = 0; b < 2; ++b) {
                        if (pool_input(k, 2 * x + a, 2 * y + b) > best) {
                            best = pool_input(k, 2 * x + a, 2 * y + b);
                            best_a = a;
                            best_b = b;
                        }
                    }
                }
                grad_in(k, 2 * x + best_a, 2 * y + best_b) += g;
            }
        }
    }
    return grad_in;
}

ActivationSet forward_record(const Volume& image, const NetworkWeights& weights,
                             std::optional<std::string_view> last_layer) {
    std::size_t stop = weights.layers.size();
    if (last_layer) {
        auto i = weights.find(*last_layer);
        if (!i) throw InvalidArgument("forward_record: unknown layer " + std::string(*last_layer));
        stop = *i + 1;
    }
    std::size_t divisor = 1;
    for (std::size_t i = 0; i + 1 < stop; ++i) {
        if (weights.layers[i].spec.pool_after) divisor *= 2;
    }
    if (image.width() % divisor != 0 || image.height() % divisor != 0 || image.width() == 0 ||
        image.height() == 0) {
        throw InvalidArgument("forward_record: image " + std::to_string(image.width()) + "x" +
                              std::to_string(image.height()) + " is not divisible by " +
                              std::to_string(divisor));
    }

    ActivationSet acts;
    Volume x = image;
    for (std::size_t i = 0; i < stop; ++i) {
        const auto& layer = weights.layers[i];
        Volume y = conv3x3_forward(x, layer);
        relu_inplace(y);
        if (layer.spec.pool_after && i + 1 < stop) x = pool2x2_forward(y, weights.pooling);
        else x = y;
        acts.add(layer.spec.name, std::move(y));
    }
    return acts;
}

Volume backward_inject(const ActivationSet& acts, const LayerGradients& grads, const NetworkWeights& weights) {
    if (acts.size() == 0) throw InvalidArgument("backward_inject: empty activation set");
    std::size_t deepest = 0;
    for (const auto& [name, g] : grads) {
        if (!acts.contains(name)) throw InvalidArgument("backward_inject: gradient for unrecorded layer " + name);
        if (!g.same_shape(acts.at(name))) {
            throw InvalidArgument("backward_inject: gradient shape for " + name + " does not match activation");
        }
        auto i = weights.find(name);
        if (!i) throw InvalidArgument("backward_inject: unknown layer " + name);
        deepest = std::max(deepest, *i);
    }
    const auto& first = acts.volumes().front();
    if (grads.empty()) return Volume(weights.layers.front().spec.in_channels, first.width(), first.height());

    Volume g_post = Volume(acts.volumes()[deepest].channels(), acts.volumes()[deepest].width(),
                           acts.volumes()[deepest].height());
    for (std::size_t i = deepest + 1; i-- > 0;) {
        const auto& layer = weights.layers[i];
        const Volume& act = acts.volumes()[i];
        if (auto it = grads.find(layer.spec.name); it != grads.end()) g_post += it->second;
        for (std::size_t j = 0; j < act.size(); ++j) {
            if (!(act.data()[j] > 0.0)) g_post.data()[j] = 0.0;
        }
        Volume g_in = conv3x3_backward(g_post, layer);
        if (i == 0) return g_in;
        const auto& below = weights.layers[i - 1];
        g_post = below.spec.pool_after ? pool2x2_backward(g_in, acts.volumes()[i - 1], weights.pooling)
                                       : std::move(g_in);
    }
    return g_post;  // unreachable
}

NetworkWeights make_toy_network(const ToyNetworkOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> width(2, 4);

    std::vector<std::size_t> channels = options.channels;
    if (channels.empty()) {
        for (int i = 0; i < 3; ++i) channels.push_back(width(rng));
    }
    std::vector<bool> pools = options.pool_after;
    if (pools.empty()) {
        pools.assign(channels.size(), false);
        if (channels.size() > 1) pools[0] = true;
    }
    if (pools.size() != channels.size()) throw InvalidArgument("toy network: pool flags do not match layers");

    NetworkWeights net;
    net.architecture = "custom";
    std::size_t in = 3;
    int block = 1, conv = 1;
    for (std::size_t l = 0; l < channels.size(); ++l) {
        ConvLayer layer;
        layer.spec = {"conv" + std::to_string(block) + "_" + std::to_string(conv), static_cast<int>(l + 1), in,
                      channels[l], pools[l]};
        layer.kernel.resize(channels[l] * in * 9);
        layer.bias.resize(channels[l]);
        for (double& w : layer.kernel) w = static_cast<float>(options.weight_scale * unit(rng));
        for (double& b : layer.bias) b = static_cast<float>(options.weight_scale * unit(rng));
        net.layers.push_back(std::move(layer));
        in = channels[l];
        if (pools[l]) {
            ++block;
            conv = 1;
        } else {
            ++conv;
        }
    }
    return net;
}

}  // namespace nst
