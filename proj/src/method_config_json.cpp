#include <set>

#include "nst/error.hpp"
#include "nst/method_config.hpp"

namespace nst {

using nlohmann::json;

json to_json(const MethodConfig& c) {
    json terms = json::array();
    for (const auto& t : c.style_terms) {
        json layers = json::array({t.layer});
        if (!t.partner.empty()) layers.push_back(t.partner);
        terms.push_back({{"variant", to_string(t.variant)}, {"layers", layers}, {"blur_count", t.blur_count}});
    }
    json weights = json::object();
    for (const auto& [layer, w] : c.weighting.per_layer) weights[layer] = {{"style", w.style}, {"content", w.content}};
    json doc = {
        {"name", c.name},
        {"content_layers", c.content_layers},
        {"style_terms", terms},
        {"weighting", to_string(c.weighting.kind)},
        {"layer_weights", weights},
        {"shift", c.shift},
        {"style_weight", c.style_weight},
        {"power", c.power},
        {"iterations", c.iterations},
        {"image_size", c.image_size},
    };
    json masking = json::object();
    for (const auto& [layer, keep] : c.mask_keep) masking[layer] = keep;
    doc["masking"] = masking;
    return doc;
}

MethodConfig method_config_from_json(const json& doc, const PresetLayout& layout) {
    MethodConfig c;
    try {
        c.name = doc.at("name").get<std::string>();
        c.content_layers = doc.at("content_layers").get<std::vector<std::string>>();
        for (const auto& t : doc.at("style_terms")) {
            StyleTerm term;
            term.variant = statistic_kind_from_string(t.at("variant").get<std::string>());
            const auto layers = t.at("layers").get<std::vector<std::string>>();
            if (layers.empty() || layers.size() > 2) throw InvalidArgument("style term needs one or two layers");
            term.layer = layers[0];
            if (layers.size() == 2) term.partner = layers[1];
            term.blur_count = t.value("blur_count", 0);
            c.style_terms.push_back(std::move(term));
        }
        const std::string weighting = doc.value("weighting", "uniform");
        WeightingKind kind;
        if (weighting == "uniform") kind = WeightingKind::Uniform;
        else if (weighting == "geometric") kind = WeightingKind::Geometric;
        else throw InvalidArgument("unknown weighting \"" + weighting + "\"");
        c.shift = doc.value("shift", 0.0);
        c.style_weight = doc.value("style_weight", 2e9);
        c.power = doc.value("power", 2.0);
        c.iterations = doc.value("iterations", 270);
        c.image_size = doc.value("image_size", 512);
        if (doc.contains("masking")) {
            for (const auto& [layer, keep] : doc.at("masking").items()) c.mask_keep[layer] = keep.get<double>();
        }

        if (doc.contains("layer_weights")) {
            c.weighting.kind = kind;
            for (const auto& [layer, w] : doc.at("layer_weights").items()) {
                c.weighting.per_layer[layer] = {w.at("style").get<double>(), w.at("content").get<double>()};
            }
        } else {
            std::set<std::string> used(c.content_layers.begin(), c.content_layers.end());
            for (const auto& t : c.style_terms) {
                used.insert(t.layer);
                if (!t.partner.empty()) used.insert(t.partner);
            }
            std::vector<LayerSpec> specs;
            for (const auto& l : layout.layers) {
                if (used.count(l.name)) specs.push_back(l);
            }
            c.weighting = make_weighting(kind, specs);
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("method config: ") + e.what());
    }
    validate_method_config(c, layout);
    return c;
}

}  // namespace nst
