#include "nst/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nst/error.hpp"

namespace nst {

namespace {

// Statistic inputs for a term, with the content weighting map aligned to the
// style layer's grid. Pairs put the larger grid first; on equal grids the deeper
// layer goes first so that the shallower one is the map that gets blurred.
struct TermInputs {
    std::vector<std::string> layers;
    std::vector<Volume> owned;  // aligned content map for ContentAware
    std::vector<const Volume*> volumes;
};

struct Alignment {
    bool upsample = false;
    std::size_t fx = 1, fy = 1;
};

Alignment alignment_of(const Volume& target, const Volume& source) {
    if (source.width() <= target.width() && source.height() <= target.height()) {
        const auto f = grid_factors(target, source);
        return {true, f.fx, f.fy};
    }
    const auto f = grid_factors(source, target);
    return {false, f.fx, f.fy};
}

Volume align(const Volume& source, const Alignment& a) {
    if (a.upsample) return nearest_upsample(source, a.fx, a.fy);
    Volume out = block_sum_downsample(source, a.fx, a.fy);
    out *= 1.0 / static_cast<double>(a.fx * a.fy);
    return out;
}

Volume align_adjoint(const Volume& grad, const Alignment& a) {
    if (a.upsample) return block_sum_downsample(grad, a.fx, a.fy);
    Volume out = nearest_upsample(grad, a.fx, a.fy);
    out *= 1.0 / static_cast<double>(a.fx * a.fy);
    return out;
}

TermInputs term_inputs(const StyleTerm& term, const ActivationSet& acts, const NetworkWeights& weights) {
    TermInputs in;
    if (term.variant == StatisticKind::ContentAware) {
        const Volume& fl = acts.at(term.layer);
        in.owned.push_back(align(acts.at(term.partner), alignment_of(fl, acts.at(term.partner))));
        in.layers = {term.layer, term.partner};
        in.volumes = {&fl, &in.owned.front()};
        return in;
    }
    if (statistic_arity(term.variant) == 1) {
        in.layers = {term.layer};
        in.volumes = {&acts.at(term.layer)};
        return in;
    }
    std::string a = term.layer, b = term.partner;
    const Volume* va = &acts.at(a);
    const Volume* vb = &acts.at(b);
    const bool a_first = va->positions() > vb->positions() ||
                         (va->positions() == vb->positions() && *weights.find(a) >= *weights.find(b));
    if (!a_first) {
        std::swap(a, b);
        std::swap(va, vb);
    }
    in.layers = {a, b};
    in.volumes = {va, vb};
    return in;
}

StatisticParams params_for(const StyleTerm& term, const MethodConfig& config) {
    return {config.shift, term.blur_count, config.power};
}

// The shallower layer of a pair owns its weight; ContentAware uses its style layer.
double term_weight(const StyleTerm& term, const MethodConfig& config, const NetworkWeights& weights) {
    if (term.variant == StatisticKind::InterLayer || term.variant == StatisticKind::AdjacentInterLayer) {
        const auto& shallow = *weights.find(term.layer) <= *weights.find(term.partner) ? term.layer : term.partner;
        return config.weighting.style(shallow);
    }
    return config.weighting.style(term.layer);
}

void accumulate(LayerGradients& grads, const std::string& layer, const Volume& g) {
    auto it = grads.find(layer);
    if (it == grads.end()) grads.emplace(layer, g);
    else it->second += g;
}

}  // namespace

Volume gradient_mask(const Volume& activations, double keep_fraction) {
    if (activations.empty()) throw InvalidArgument("gradient_mask: empty volume");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw InvalidArgument("gradient_mask: keep fraction must lie in (0, 1]");
    }
    const auto values = activations.data();
    const auto keep = static_cast<std::size_t>(std::llround(keep_fraction * static_cast<double>(values.size())));
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto before = [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); };
    if (keep < order.size()) std::nth_element(order.begin(), order.begin() + static_cast<long>(keep), order.end(), before);
    Volume mask(activations.channels(), activations.width(), activations.height());
    for (std::size_t i = 0; i < keep; ++i) mask.data()[order[i]] = 1.0;
    return mask;
}

std::string deepest_layer(const MethodConfig& config, const NetworkWeights& weights) {
    std::size_t deepest = 0;
    auto visit = [&](const std::string& name) {
        auto i = weights.find(name);
        if (!i) throw InvalidArgument("method " + config.name + " uses layer " + name + " missing from the network");
        deepest = std::max(deepest, *i);
    };
    for (const auto& l : config.content_layers) visit(l);
    for (const auto& t : config.style_terms) {
        visit(t.layer);
        if (!t.partner.empty()) visit(t.partner);
    }
    for (const auto& [l, keep] : config.mask_keep) visit(l);
    return weights.layers.at(deepest).spec.name;
}

ActivationSet capture_activations(const Volume& image, const MethodConfig& config, const NetworkWeights& weights) {
    return forward_record(image, weights, deepest_layer(config, weights));
}

StyleRepresentation style_target(const Volume& style_image, const MethodConfig& config, const NetworkWeights& weights) {
    const auto acts = capture_activations(style_image, config, weights);
    StyleRepresentation rep;
    for (const auto& term : config.style_terms) {
        const auto in = term_inputs(term, acts, weights);
        rep.keys.push_back(term.key());
        rep.statistics.push_back(evaluate_statistic(term.variant, params_for(term, config), in.volumes));
    }
    return rep;
}

StyleTransferLoss::StyleTransferLoss(MethodConfig config, const NetworkWeights& weights, StyleRepresentation style,
                                     ActivationSet content)
    : config_(std::move(config)), weights_(weights), style_(std::move(style)), content_(std::move(content)) {
    deepest_ = deepest_layer(config_, weights_);
    if (style_.keys.size() != config_.style_terms.size() || style_.statistics.size() != style_.keys.size()) {
        throw InvalidArgument("style representation does not match the method's style terms");
    }
    for (std::size_t i = 0; i < config_.style_terms.size(); ++i) {
        if (style_.keys[i] != config_.style_terms[i].key()) {
            throw InvalidArgument("style representation key " + style_.keys[i] + " does not match " +
                                  config_.style_terms[i].key());
        }
    }
    for (const auto& l : config_.content_layers) {
        if (!content_.contains(l)) throw InvalidArgument("content target lacks layer " + l);
    }
    for (const auto& [layer, keep] : config_.mask_keep) {
        if (!content_.contains(layer)) throw InvalidArgument("content target lacks masked layer " + layer);
        masks_.emplace(layer, gradient_mask(content_.at(layer), keep));
    }
}

LossResult StyleTransferLoss::evaluate(const Volume& image) const {
    const auto acts = forward_record(image, weights_, deepest_);
    LossResult result;

    LayerGradients style_grads;
    double style_sum = 0.0;
    for (std::size_t t = 0; t < config_.style_terms.size(); ++t) {
        const auto& term = config_.style_terms[t];
        const auto in = term_inputs(term, acts, weights_);
        const auto params = params_for(term, config_);
        const auto stat = evaluate_statistic(term.variant, params, in.volumes);
        const auto& target = style_.statistics[t];
        if (stat.shape != target.shape) throw InvalidArgument("style target shape mismatch for " + term.key());

        const auto extent = statistic_extent(term.variant, in.volumes);
        const double positions = static_cast<double>(extent.positions);
        const double norm = 4.0 * positions * positions * static_cast<double>(extent.channel_product);
        const double w = term_weight(term, config_, weights_);

        std::vector<double> upstream(stat.size());
        double sq = 0.0;
        for (std::size_t i = 0; i < stat.size(); ++i) {
            const double d = stat.value[i] - target.value[i];
            sq += d * d;
            upstream[i] = config_.style_weight * w * 2.0 * d / norm;
        }
        style_sum += w * sq / norm;
        if (config_.style_weight == 0.0) continue;

        auto grads = statistic_vjp(term.variant, params, in.volumes, upstream);
        if (term.variant == StatisticKind::ContentAware) {
            grads[1] = align_adjoint(grads[1], alignment_of(*in.volumes[0], acts.at(term.partner)));
        }
        for (std::size_t i = 0; i < grads.size(); ++i) accumulate(style_grads, in.layers[i], grads[i]);
    }
    for (auto& [layer, mask] : masks_) {
        auto it = style_grads.find(layer);
        if (it == style_grads.end()) continue;
        for (std::size_t i = 0; i < mask.size(); ++i) it->second.data()[i] *= mask.data()[i];
    }
    result.style = config_.style_weight * style_sum;

    LayerGradients grads = std::move(style_grads);
    for (const auto& layer : config_.content_layers) {
        const Volume& f = acts.at(layer);
        const Volume& fc = content_.at(layer);
        if (!f.same_shape(fc)) throw InvalidArgument("content target shape mismatch for " + layer);
        const double w = config_.weighting.content(layer);
        const double m = static_cast<double>(f.size());
        Volume g(f.channels(), f.width(), f.height());
        double sq = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double d = f.data()[i] - fc.data()[i];
            sq += d * d;
            g.data()[i] = 2.0 * w * d / m;
        }
        result.content += w * sq / m;
        accumulate(grads, layer, g);
    }

    result.total = result.style + result.content;
    result.gradient = backward_inject(acts, grads, weights_);
    return result;
}

LossResult total_loss_grad(const Volume& image, const MethodConfig& config, const StyleRepresentation& target_style,
                           const ActivationSet& target_content, const NetworkWeights& weights) {
    return StyleTransferLoss(config, weights, target_style, target_content).evaluate(image);
}

}  // namespace nst
