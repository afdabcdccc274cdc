#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nst/tensor.hpp"

namespace nst {

enum class PoolingMode { Average, Max };

/// One 3x3 convolution of the trunk. `index` is the 1-based depth among all
/// conv layers (conv1_1 is 1, conv5_4 is 16 for VGG-19).
struct LayerSpec {
    std::string name;
    int index = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    bool pool_after = false;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// The sixteen conv layers of VGG-19, conv1_1 .. conv5_4.
const std::vector<LayerSpec>& vgg19_layers();

struct ConvLayer {
    LayerSpec spec;
    // out x in x 3 x 3; the last two axes are (ky, kx), i.e. row then column.
    std::vector<double> kernel;
    std::vector<double> bias;

    double weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const noexcept {
        return kernel[((o * spec.in_channels + i) * 3 + ky) * 3 + kx];
    }
};

/// How display pixels map into the network's input space. Stored with the
/// weights because it is a property of how they were trained.
struct InputConvention {
    // channel_order[c] is the RGB component fed to network input channel c.
    std::array<int, 3> channel_order{2, 1, 0};
    // Subtracted per network input channel, in network channel order.
    std::array<double, 3> mean{104.006, 116.669, 122.679};

    friend bool operator==(const InputConvention&, const InputConvention&) = default;
};

struct NetworkWeights {
    std::string architecture = "vgg19";
    std::vector<ConvLayer> layers;
    PoolingMode pooling = PoolingMode::Average;
    InputConvention input;

    std::optional<std::size_t> find(std::string_view name) const noexcept;
    const ConvLayer& layer(std::string_view name) const;
    std::vector<LayerSpec> specs() const;
};

/// Post-ReLU activations of every recorded layer, kept in depth order.
class ActivationSet {
  public:
    void add(std::string name, Volume volume);

    std::size_t size() const noexcept { return names_.size(); }
    bool contains(std::string_view name) const noexcept;
    const Volume& at(std::string_view name) const;
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<Volume>& volumes() const noexcept { return volumes_; }

  private:
    std::vector<std::string> names_;
    std::vector<Volume> volumes_;
};

/// Gradient of the loss with respect to individual layer activations.
using LayerGradients = std::map<std::string, Volume, std::less<>>;

/// Stride 1, zero padding 1, cross-correlation (no kernel flip):
/// out(o, x, y) = bias[o] + sum_{i,ky,kx} w[o][i][ky][kx] * in(i, x + kx - 1, y + ky - 1).
Volume conv3x3_forward(const Volume& in, const ConvLayer& layer);

/// Adjoint of the linear part of conv3x3_forward with respect to its input.
Volume conv3x3_backward(const Volume& grad_out, const ConvLayer& layer);

Volume pool2x2_forward(const Volume& in, PoolingMode mode);
Volume pool2x2_backward(const Volume& grad_out, const Volume& pool_input, PoolingMode mode);

/// Runs conv -> ReLU for every layer (pooling 2x2 after the flagged ones) and
/// records each post-ReLU volume. Stops after `last_layer` when given.
ActivationSet forward_record(const Volume& image, const NetworkWeights& weights,
                             std::optional<std::string_view> last_layer = std::nullopt);

/// dLoss/dImage for Loss = sum_l <grads[l], F^l>, linearized at `acts`.
Volume backward_inject(const ActivationSet& acts, const LayerGradients& grads,
                       const NetworkWeights& weights);

struct ToyNetworkOptions {
    std::uint64_t seed = 42;
    // Output channels per layer; empty means 3 layers with random 2..4 channels.
    std::vector<std::size_t> channels;
    // Layers followed by 2x2 pooling (by position); defaults to after the first.
    std::vector<bool> pool_after;
    // Uniform weight range is [-weight_scale, weight_scale].
    double weight_scale = 1.0;
};

/// Small random network with VGG-style layer names (conv<block>_<n>).
/// Weights are single-precision representable so containers round-trip.
NetworkWeights make_toy_network(const ToyNetworkOptions& options = {});

}  // namespace nst
