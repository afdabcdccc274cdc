#pragma once

#include <string>
#include <vector>

#include "nst/method_config.hpp"
#include "nst/network.hpp"
#include "nst/statistics.hpp"

namespace nst {

/// Target statistics of the style image, one per configured style term and in
/// the same order.
struct StyleRepresentation {
    std::vector<std::string> keys;
    std::vector<GramStatistic> statistics;
};

/// Binary mask keeping the round(keep_fraction * size) largest entries of
/// `activations`; ties go to the entry that comes first in storage order.
Volume gradient_mask(const Volume& activations, double keep_fraction);

/// Deepest layer a config reads from, so forward passes can stop there.
std::string deepest_layer(const MethodConfig& config, const NetworkWeights& weights);

/// Records the activations a config needs for `image`.
ActivationSet capture_activations(const Volume& image, const MethodConfig& config, const NetworkWeights& weights);

StyleRepresentation style_target(const Volume& style_image, const MethodConfig& config, const NetworkWeights& weights);

struct LossResult {
    double total = 0.0;
    // Already multiplied by the style weight alpha.
    double style = 0.0;
    double content = 0.0;
    Volume gradient;
};

/// The style-transfer objective for fixed targets:
///   alpha * sum_t w_t ||G_t(I) - G_t(S)||^2 / N_t + sum_l w_l ||F^l(I) - F^l(C)||^2 / M_l
/// with N_t = 4 * positions^2 * (product of channel counts) and M_l = K_l X_l Y_l.
/// Masks (when configured) are built once from the content activations.
class StyleTransferLoss {
  public:
    StyleTransferLoss(MethodConfig config, const NetworkWeights& weights, StyleRepresentation style,
                      ActivationSet content);

    LossResult evaluate(const Volume& image) const;

    const MethodConfig& config() const noexcept { return config_; }

  private:
    MethodConfig config_;
    const NetworkWeights& weights_;
    StyleRepresentation style_;
    ActivationSet content_;
    std::string deepest_;
    LayerGradients masks_;
};

LossResult total_loss_grad(const Volume& image, const MethodConfig& config, const StyleRepresentation& target_style,
                           const ActivationSet& target_content, const NetworkWeights& weights);

}  // namespace nst
