#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nst/network.hpp"
#include "nst/statistics.hpp"

namespace nst {

enum class WeightingKind { Uniform, Geometric };

std::string_view to_string(WeightingKind kind) noexcept;

struct LayerWeights {
    double style = 1.0;
    double content = 1.0;

    friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

/// Per-layer style and content weights, keyed by layer name.
struct WeightingScheme {
    WeightingKind kind = WeightingKind::Uniform;
    std::map<std::string, LayerWeights, std::less<>> per_layer;

    double style(std::string_view layer) const;
    double content(std::string_view layer) const;

    friend bool operator==(const WeightingScheme&, const WeightingScheme&) = default;
};

/// Geometric weights for the given network depth indices (distinct). With D
/// layers and d the 1-based rank of a layer among them, style = 2^(D - d) and
/// content = 2^d. Results are in input order.
std::vector<LayerWeights> geometric_weights(std::span<const int> layer_indices);

/// Weights of the given kind over `layers` (ordered by depth).
WeightingScheme make_weighting(WeightingKind kind, std::span<const LayerSpec> layers);

/// One style statistic of a method.
///
/// For InterLayer and AdjacentInterLayer, (layer, partner) is the pair as
/// listed (e.g. conv5_4 - conv5_3); for ContentAware, `partner` is the
/// content layer that weights the slices. Single-layer kinds leave it empty.
struct StyleTerm {
    StatisticKind variant = StatisticKind::PlainGram;
    std::string layer;
    std::string partner;
    int blur_count = 0;

    std::string key() const;

    friend bool operator==(const StyleTerm&, const StyleTerm&) = default;
};

struct MethodConfig {
    std::string name;
    std::vector<std::string> content_layers;
    std::vector<StyleTerm> style_terms;
    WeightingScheme weighting;
    double shift = 0.0;
    double style_weight = 2e9;
    // Element-wise exponent of Amplified terms.
    double power = 2.0;
    // Gradient masking keep fraction per style layer; empty disables masking.
    std::map<std::string, double, std::less<>> mask_keep;
    int iterations = 270;
    int image_size = 512;

    bool masked() const noexcept { return !mask_keep.empty(); }

    friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

/// The layer roles presets are expressed in. For VGG-19, the block heads are
/// conv1_1 .. conv5_1 and the content layer is conv4_2.
struct PresetLayout {
    std::vector<LayerSpec> layers;
    std::vector<std::string> block_heads;
    std::string content_layer;

    /// Block heads are the first conv after each pooling; the content layer
    /// is conv4_2 when present, otherwise the deepest layer.
    static PresetLayout from_layers(std::vector<LayerSpec> layers);
    const LayerSpec& spec(std::string_view name) const;
};

PresetLayout vgg19_layout();

struct MethodOverrides {
    std::optional<double> style_weight;
    std::optional<double> shift;
    std::optional<double> power;
    std::optional<int> blur_count;
    std::optional<int> iterations;
    std::optional<int> image_size;
    std::optional<std::vector<double>> keep_fractions;
};

/// All preset names, the compared methods first, then the experimental ones.
const std::vector<std::string>& method_names();
bool is_experimental_method(std::string_view name);

MethodConfig build_method_config(std::string_view name, const MethodOverrides& overrides = {},
                                 const PresetLayout& layout = vgg19_layout());

/// Throws InvalidArgument when the config refers to unknown layers or is otherwise inconsistent.
void validate_method_config(const MethodConfig& config, const PresetLayout& layout);

/// Human-readable table of every preset.
std::string method_table(const PresetLayout& layout = vgg19_layout());

nlohmann::json to_json(const MethodConfig& config);
/// Weights absent from the document are derived from "weighting" over `layout`.
MethodConfig method_config_from_json(const nlohmann::json& doc, const PresetLayout& layout = vgg19_layout());

}  // namespace nst
