#pragma once

// Expected VGG-19 presets for the nine compared methods, written out by hand.

#include <string>
#include <utility>
#include <vector>

#include "nst/method_config.hpp"

namespace nst::golden {

inline const std::vector<std::string> kAll = {"conv1_1", "conv1_2", "conv2_1", "conv2_2", "conv3_1", "conv3_2",
                                              "conv3_3", "conv3_4", "conv4_1", "conv4_2", "conv4_3", "conv4_4",
                                              "conv5_1", "conv5_2", "conv5_3", "conv5_4"};
inline const std::vector<std::string> kHeads = {"conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1"};

struct Golden {
    std::string name;
    std::vector<std::string> content;
    // (layer, partner) per term in order; partner empty for single-layer terms.
    std::vector<std::pair<std::string, std::string>> terms;
    StatisticKind variant;
    WeightingKind weighting;
    double shift;
    bool blurred;
    bool adjacent;
};

inline std::vector<std::pair<std::string, std::string>> singles(const std::vector<std::string>& layers) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& l : layers) out.emplace_back(l, "");
    return out;
}

inline std::vector<std::pair<std::string, std::string>> chain() {
    std::vector<std::pair<std::string, std::string>> out;
    for (int l = 15; l >= 1; --l) out.emplace_back(kAll[l], kAll[l - 1]);
    return out;
}

inline std::vector<std::pair<std::string, std::string>> all_to_content() {
    std::vector<std::pair<std::string, std::string>> out;
    for (int l = 15; l >= 0; --l) out.emplace_back("conv4_2", kAll[l]);
    return out;
}

inline std::vector<Golden> table() {
    using K = StatisticKind;
    using W = WeightingKind;
    return {
        {"Classic", {"conv4_2"}, singles(kHeads), K::PlainGram, W::Uniform, 0.0, false, false},
        {"ClassicShifted", {"conv4_2"}, singles(kHeads), K::ShiftedGram, W::Uniform, -1.0, false, false},
        {"ClassicDense", kAll, singles(kAll), K::ShiftedGram, W::Geometric, -1.0, false, false},
        {"AllToContent", kAll, all_to_content(), K::InterLayer, W::Geometric, -1.0, false, false},
        {"Chain", kAll, chain(), K::InterLayer, W::Geometric, -1.0, false, false},
        {"ChainUniform", kAll, chain(), K::InterLayer, W::Uniform, -1.0, false, false},
        {"ChainUnshifted", kAll, chain(), K::InterLayer, W::Geometric, 0.0, false, false},
        {"ChainBlurred", kAll, chain(), K::InterLayer, W::Geometric, -1.0, true, false},
        {"ChainExtended", kAll, chain(), K::AdjacentInterLayer, W::Geometric, -1.0, false, true},
    };
}

/// Empty when `c` matches `g`; otherwise a description of the first difference.
inline std::string compare(const Golden& g, const MethodConfig& c) {
    if (c.name != g.name) return "name";
    if (c.content_layers != g.content) return "content layers";
    if (c.style_terms.size() != g.terms.size()) return "style term count";
    for (std::size_t i = 0; i < g.terms.size(); ++i) {
        const auto& t = c.style_terms[i];
        if (t.variant != g.variant) return "variant of term " + std::to_string(i);
        if (t.layer != g.terms[i].first || t.partner != g.terms[i].second) return "layers of term " + std::to_string(i);
        if (t.blur_count != (g.blurred ? 1 : 0)) return "blur of term " + std::to_string(i);
    }
    const bool adjacent = !c.style_terms.empty() && c.style_terms[0].variant == StatisticKind::AdjacentInterLayer;
    if (adjacent != g.adjacent) return "adjacent flag";
    if (c.weighting.kind != g.weighting) return "weighting";
    if (c.shift != g.shift) return "shift";
    if (c.masked()) return "masking";
    return "";
}

}  // namespace nst::golden
