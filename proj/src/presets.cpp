#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nst/error.hpp"
#include "nst/method_config.hpp"

namespace nst {

namespace {

const std::vector<std::string> kCompared = {"Classic",     "ClassicShifted", "ClassicDense",   "AllToContent", "Chain",
                                            "ChainUniform", "ChainUnshifted", "ChainBlurred", "ChainExtended"};
const std::vector<std::string> kExperimental = {"Amplified", "ContentAware", "GramCube", "Masked"};

const std::vector<double> kDefaultKeep = {1.0, 0.4, 0.2, 0.1, 0.1};

StatisticKind same_layer_kind(double shift) {
    return shift == 0.0 ? StatisticKind::PlainGram : StatisticKind::ShiftedGram;
}

std::vector<std::string> all_names(const PresetLayout& layout) {
    std::vector<std::string> out;
    for (const auto& l : layout.layers) out.push_back(l.name);
    return out;
}

}  // namespace

std::string_view to_string(WeightingKind kind) noexcept {
    return kind == WeightingKind::Uniform ? "uniform" : "geometric";
}

double WeightingScheme::style(std::string_view layer) const {
    auto it = per_layer.find(layer);
    if (it == per_layer.end()) throw InvalidArgument("no style weight for layer " + std::string(layer));
    return it->second.style;
}

double WeightingScheme::content(std::string_view layer) const {
    auto it = per_layer.find(layer);
    if (it == per_layer.end()) throw InvalidArgument("no content weight for layer " + std::string(layer));
    return it->second.content;
}

std::vector<LayerWeights> geometric_weights(std::span<const int> layer_indices) {
    std::vector<int> sorted(layer_indices.begin(), layer_indices.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("geometric_weights: duplicate layer index");
    }
    const int depth = static_cast<int>(sorted.size());
    std::vector<LayerWeights> out;
    out.reserve(layer_indices.size());
    for (int index : layer_indices) {
        if (index < 1) throw InvalidArgument("geometric_weights: layer index must be >= 1");
        const int rank = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), index) - sorted.begin()) + 1;
        out.push_back({std::ldexp(1.0, depth - rank), std::ldexp(1.0, rank)});
    }
    return out;
}

WeightingScheme make_weighting(WeightingKind kind, std::span<const LayerSpec> layers) {
    WeightingScheme scheme;
    scheme.kind = kind;
    if (kind == WeightingKind::Uniform) {
        for (const auto& l : layers) scheme.per_layer[l.name] = {1.0, 1.0};
        return scheme;
    }
    std::vector<int> indices;
    for (const auto& l : layers) indices.push_back(l.index);
    const auto weights = geometric_weights(indices);
    for (std::size_t i = 0; i < layers.size(); ++i) scheme.per_layer[layers[i].name] = weights[i];
    return scheme;
}

std::string StyleTerm::key() const {
    std::string k = std::string(to_string(variant)) + "(" + layer;
    if (!partner.empty()) k += "," + partner;
    if (blur_count != 0) k += ";blur=" + std::to_string(blur_count);
    return k + ")";
}

PresetLayout PresetLayout::from_layers(std::vector<LayerSpec> layers) {
    if (layers.empty()) throw InvalidArgument("preset layout needs at least one layer");
    PresetLayout layout;
    bool head = true;
    for (const auto& l : layers) {
        if (head) layout.block_heads.push_back(l.name);
        head = l.pool_after;
        if (l.name == "conv4_2") layout.content_layer = l.name;
    }
    if (layout.content_layer.empty()) layout.content_layer = layers.back().name;
    layout.layers = std::move(layers);
    return layout;
}

const LayerSpec& PresetLayout::spec(std::string_view name) const {
    for (const auto& l : layers) {
        if (l.name == name) return l;
    }
    throw InvalidArgument("unknown layer " + std::string(name));
}

PresetLayout vgg19_layout() { return PresetLayout::from_layers(vgg19_layers()); }

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = [] {
        auto all = kCompared;
        all.insert(all.end(), kExperimental.begin(), kExperimental.end());
        return all;
    }();
    return names;
}

bool is_experimental_method(std::string_view name) {
    return std::find(kExperimental.begin(), kExperimental.end(), name) != kExperimental.end();
}

MethodConfig build_method_config(std::string_view name, const MethodOverrides& overrides, const PresetLayout& layout) {
    const auto& names = method_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw InvalidArgument("unknown method \"" + std::string(name) + "\"");
    }

    MethodConfig c;
    c.name = std::string(name);
    const bool classic_family = name == "Classic" || name == "Masked" || name == "Amplified" ||
                                name == "ContentAware" || name == "GramCube";
    const bool shifted = !(name == "Classic" || name == "ChainUnshifted" || name == "Masked" || name == "Amplified");
    const bool geometric = !(classic_family || name == "ClassicShifted" || name == "ChainUniform");

    c.shift = overrides.shift.value_or(shifted ? -1.0 : 0.0);
    c.style_weight = overrides.style_weight.value_or(2e9);
    c.power = overrides.power.value_or(2.0);
    c.iterations = overrides.iterations.value_or(270);
    c.image_size = overrides.image_size.value_or(512);
    if (overrides.iterations && *overrides.iterations < 1) throw InvalidArgument("iterations must be >= 1");

    const auto& heads = layout.block_heads;
    const auto content = layout.content_layer;
    const auto all = all_names(layout);

    if (classic_family || name == "ClassicShifted") c.content_layers = {content};
    else c.content_layers = all;

    auto pair_blur = [&](const std::string& a, const std::string& b, bool blurred) {
        if (overrides.blur_count) return *overrides.blur_count;
        if (!blurred) return 0;
        return std::max(0, std::abs(layout.spec(a).index - layout.spec(b).index));
    };

    if (name == "Classic" || name == "ClassicShifted" || name == "Masked") {
        for (const auto& h : heads) c.style_terms.push_back({same_layer_kind(c.shift), h, "", 0});
    } else if (name == "ClassicDense") {
        for (const auto& l : all) c.style_terms.push_back({same_layer_kind(c.shift), l, "", 0});
    } else if (name == "AllToContent") {
        for (auto it = all.rbegin(); it != all.rend(); ++it) {
            c.style_terms.push_back({StatisticKind::InterLayer, content, *it, pair_blur(content, *it, false)});
        }
    } else if (name.starts_with("Chain")) {
        const auto kind = name == "ChainExtended" ? StatisticKind::AdjacentInterLayer : StatisticKind::InterLayer;
        const bool blurred = name == "ChainBlurred";
        for (std::size_t l = all.size() - 1; l >= 1; --l) {
            c.style_terms.push_back({kind, all[l], all[l - 1], pair_blur(all[l], all[l - 1], blurred)});
        }
    } else if (name == "Amplified") {
        for (const auto& h : heads) c.style_terms.push_back({StatisticKind::Amplified, h, "", 0});
    } else if (name == "ContentAware") {
        const int content_index = layout.spec(content).index;
        for (const auto& h : heads) {
            if (layout.spec(h).index < content_index) c.style_terms.push_back({StatisticKind::ContentAware, h, content, 0});
        }
    } else if (name == "GramCube") {
        for (std::size_t i = 0; i < std::min<std::size_t>(2, heads.size()); ++i) {
            c.style_terms.push_back({StatisticKind::GramCube, heads[i], "", 0});
        }
    }

    if (name == "Masked" || overrides.keep_fractions) {
        const auto& keep = overrides.keep_fractions ? *overrides.keep_fractions : kDefaultKeep;
        if (keep.empty()) throw InvalidArgument("keep fractions must not be empty");
        std::vector<std::string> style_layers;
        for (const auto& t : c.style_terms) {
            if (statistic_arity(t.variant) != 1) throw InvalidArgument("masking applies to single-layer statistics only");
            style_layers.push_back(t.layer);
        }
        for (std::size_t i = 0; i < style_layers.size(); ++i) {
            c.mask_keep[style_layers[i]] = keep[std::min(i, keep.size() - 1)];
        }
    }

    // Weights span every layer the method touches.
    std::set<std::string> used(c.content_layers.begin(), c.content_layers.end());
    for (const auto& t : c.style_terms) {
        used.insert(t.layer);
        if (!t.partner.empty()) used.insert(t.partner);
    }
    std::vector<LayerSpec> used_specs;
    for (const auto& l : layout.layers) {
        if (used.count(l.name)) used_specs.push_back(l);
    }
    c.weighting = make_weighting(geometric ? WeightingKind::Geometric : WeightingKind::Uniform, used_specs);
    validate_method_config(c, layout);
    return c;
}

void validate_method_config(const MethodConfig& c, const PresetLayout& layout) {
    const auto& names = method_names();
    if (std::find(names.begin(), names.end(), c.name) == names.end()) {
        throw InvalidArgument("unknown method \"" + c.name + "\"");
    }
    if (c.iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (c.image_size < 16 || c.image_size % 16 != 0) throw InvalidArgument("image size must be a positive multiple of 16");
    if (!std::isfinite(c.style_weight) || c.style_weight < 0) throw InvalidArgument("style weight must be finite and >= 0");
    if (!std::isfinite(c.shift)) throw InvalidArgument("shift must be finite");
    for (const auto& l : c.content_layers) {
        layout.spec(l);
        c.weighting.content(l);
    }
    for (const auto& t : c.style_terms) {
        layout.spec(t.layer);
        c.weighting.style(t.layer);
        if (t.blur_count < 0) throw InvalidArgument("negative blur count in " + t.key());
        const bool needs_partner = statistic_arity(t.variant) == 2;
        if (needs_partner != !t.partner.empty()) throw InvalidArgument("term " + t.key() + " has a wrong layer count");
        if (needs_partner) {
            layout.spec(t.partner);
            c.weighting.style(t.partner);
        }
        if (t.variant == StatisticKind::Amplified && !(c.power >= 1.0)) throw InvalidArgument("power must be >= 1");
    }
    for (const auto& [layer, keep] : c.mask_keep) {
        if (!(keep > 0.0 && keep <= 1.0)) throw InvalidArgument("keep fraction for " + layer + " must lie in (0, 1]");
        layout.spec(layer);
    }
}

std::string method_table(const PresetLayout& layout) {
    std::ostringstream out;
    out << "method          status        content            style terms                                                weighting  shift  blur  adjacent\n";
    for (const auto& name : method_names()) {
        const auto c = build_method_config(name, {}, layout);
        std::string content = c.content_layers.size() == layout.layers.size() ? "all" : "";
        if (content.empty()) {
            for (std::size_t i = 0; i < c.content_layers.size(); ++i) content += (i ? "," : "") + c.content_layers[i];
        }
        std::string style;
        if (!c.style_terms.empty()) {
            style = std::string(to_string(c.style_terms.front().variant)) + " x" + std::to_string(c.style_terms.size()) +
                    ": " + c.style_terms.front().layer;
            if (!c.style_terms.front().partner.empty()) style += "-" + c.style_terms.front().partner;
            if (c.style_terms.size() > 1) {
                style += " .. " + c.style_terms.back().layer;
                if (!c.style_terms.back().partner.empty()) style += "-" + c.style_terms.back().partner;
            }
        }
        const bool blurred = std::any_of(c.style_terms.begin(), c.style_terms.end(),
                                         [](const StyleTerm& t) { return t.blur_count > 0; });
        const bool adjacent = std::any_of(c.style_terms.begin(), c.style_terms.end(), [](const StyleTerm& t) {
            return t.variant == StatisticKind::AdjacentInterLayer;
        });
        char line[512];
        std::snprintf(line, sizeof line, "%-15s %-13s %-18s %-58s %-10s %-6g %-5s %s\n", name.c_str(),
                      is_experimental_method(name) ? "experimental" : "compared", content.c_str(), style.c_str(),
                      std::string(to_string(c.weighting.kind)).c_str(), c.shift, blurred ? "yes" : "no",
                      adjacent ? "yes" : "no");
        out << line;
    }
    return out.str();
}

}  // namespace nst
