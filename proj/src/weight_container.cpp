#include "nst/weight_container.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "nst/error.hpp"

namespace nst {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T v) {
    v = byteswap_if_big(v);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T read_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    T v;
    std::memcpy(&v, bytes.data() + offset, sizeof(T));
    return byteswap_if_big(v);
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::string channel_order_name(const std::array<int, 3>& order) {
    std::string s;
    for (int c : order) s += "RGB"[c];
    return s;
}

std::array<int, 3> parse_channel_order(const std::string& s) {
    std::array<int, 3> order{};
    if (s.size() != 3) throw LoadError("weight container: bad channel_order \"" + s + "\"");
    for (std::size_t i = 0; i < 3; ++i) {
        const auto pos = std::string_view("RGB").find(s[i]);
        if (pos == std::string_view::npos) throw LoadError("weight container: bad channel_order \"" + s + "\"");
        order[i] = static_cast<int>(pos);
    }
    if (order[0] == order[1] || order[1] == order[2] || order[0] == order[2]) {
        throw LoadError("weight container: channel_order \"" + s + "\" repeats a channel");
    }
    return order;
}

std::string shape_text(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

std::vector<LayerSpec> layers_from_manifest(const json& manifest) {
    const std::string arch = manifest.value("architecture", "vgg19");
    if (arch == "vgg19") {
        if (manifest.contains("layers")) {
            // Optional, but when present it must agree with the fixed table.
            const auto& table = vgg19_layers();
            const auto& listed = manifest.at("layers");
            if (listed.size() != table.size()) throw LoadError("weight container: vgg19 layer table has wrong length");
        }
        return vgg19_layers();
    }
    if (arch != "custom") throw LoadError("weight container: unknown architecture \"" + arch + "\"");
    if (!manifest.contains("layers")) throw LoadError("weight container: custom architecture without layer table");
    std::vector<LayerSpec> specs;
    int index = 1;
    for (const auto& l : manifest.at("layers")) {
        specs.push_back({l.at("name").get<std::string>(), index++, l.at("in_channels").get<std::size_t>(),
                         l.at("out_channels").get<std::size_t>(), l.at("pool_after").get<bool>()});
    }
    if (specs.empty()) throw LoadError("weight container: empty layer table");
    if (specs.front().in_channels != 3) throw LoadError("weight container: first layer must take 3 channels");
    for (std::size_t i = 1; i < specs.size(); ++i) {
        if (specs[i].in_channels != specs[i - 1].out_channels) {
            throw LoadError("weight container: " + specs[i].name + " input channels do not chain");
        }
    }
    return specs;
}

}  // namespace

std::vector<std::uint8_t> write_weight_container(const NetworkWeights& weights) {
    json manifest;
    manifest["architecture"] = weights.architecture;
    manifest["pooling"] = weights.pooling == PoolingMode::Average ? "average" : "max";
    manifest["input"] = {{"channel_order", channel_order_name(weights.input.channel_order)},
                         {"mean", weights.input.mean}};
    json layers = json::array();
    json entries = json::array();
    std::vector<std::uint8_t> payload;
    auto add_entry = [&](const std::string& name, const char* kind, std::vector<std::size_t> shape,
                         const std::vector<double>& values) {
        const std::size_t offset = payload.size();
        for (double v : values) append_le(payload, static_cast<float>(v));
        entries.push_back({{"name", name},
                           {"kind", kind},
                           {"shape", shape},
                           {"dtype", "f32"},
                           {"byte_offset", offset},
                           {"byte_length", payload.size() - offset}});
    };
    for (const auto& layer : weights.layers) {
        const auto& s = layer.spec;
        layers.push_back({{"name", s.name},
                          {"in_channels", s.in_channels},
                          {"out_channels", s.out_channels},
                          {"pool_after", s.pool_after}});
        add_entry(s.name, "kernel", {s.out_channels, s.in_channels, 3, 3}, layer.kernel);
        add_entry(s.name, "bias", {s.out_channels}, layer.bias);
    }
    manifest["layers"] = layers;
    manifest["entries"] = entries;

    const std::string text = manifest.dump();
    std::vector<std::uint8_t> out(kContainerMagic.begin(), kContainerMagic.end());
    append_le(out, static_cast<std::uint64_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), payload.begin(), payload.end());
    append_le(out, crc32_of(payload));
    return out;
}

NetworkWeights load_weights(std::span<const std::uint8_t> container) {
    constexpr std::size_t header = 8 + 8;
    if (container.size() < header + 4 ||
        std::memcmp(container.data(), kContainerMagic.data(), kContainerMagic.size()) != 0) {
        throw LoadError("weight container: bad magic");
    }
    const auto manifest_len = read_le<std::uint64_t>(container, 8);
    if (manifest_len > container.size() - header - 4) throw LoadError("weight container: truncated manifest");
    const auto payload_begin = header + static_cast<std::size_t>(manifest_len);
    const auto payload = container.subspan(payload_begin, container.size() - payload_begin - 4);
    const auto stored_crc = read_le<std::uint32_t>(container, container.size() - 4);
    if (crc32_of(payload) != stored_crc) throw LoadError("weight container: payload checksum mismatch");

    json manifest;
    try {
        manifest = json::parse(container.begin() + header, container.begin() + static_cast<long>(payload_begin));
    } catch (const json::exception& e) {
        throw LoadError(std::string("weight container: manifest is not valid JSON: ") + e.what());
    }

    NetworkWeights net;
    try {
        net.architecture = manifest.value("architecture", "vgg19");
        const std::string pooling = manifest.value("pooling", "average");
        if (pooling == "average") net.pooling = PoolingMode::Average;
        else if (pooling == "max") net.pooling = PoolingMode::Max;
        else throw LoadError("weight container: unknown pooling \"" + pooling + "\"");
        if (manifest.contains("input")) {
            const auto& in = manifest.at("input");
            net.input.channel_order = parse_channel_order(in.value("channel_order", std::string("BGR")));
            if (in.contains("mean")) net.input.mean = in.at("mean").get<std::array<double, 3>>();
        }

        const auto specs = layers_from_manifest(manifest);
        const auto& entries = manifest.at("entries");
        auto find_entry = [&](const std::string& name, const std::string& kind) -> const json* {
            for (const auto& e : entries) {
                if (e.at("name").get<std::string>() == name && e.at("kind").get<std::string>() == kind) return &e;
            }
            return nullptr;
        };
        auto check_shape = [&](const json& e, const std::string& label, const std::vector<std::size_t>& expected) {
            if (e.at("dtype").get<std::string>() != "f32") throw LoadError("weight container: " + label + " dtype is not f32");
            const auto shape = e.at("shape").get<std::vector<std::size_t>>();
            if (shape != expected) {
                throw LoadError("weight container: " + label + " shape " + shape_text(shape) + ", expected " +
                                shape_text(expected));
            }
        };
        auto read_entry = [&](const json& e, const std::string& label, std::size_t count) {
            const auto offset = e.at("byte_offset").get<std::size_t>();
            const auto length = e.at("byte_length").get<std::size_t>();
            if (length != count * 4 || offset > payload.size() || length > payload.size() - offset) {
                throw LoadError("weight container: " + label + " byte range is invalid");
            }
            std::vector<double> values(count);
            for (std::size_t i = 0; i < count; ++i) {
                const auto bits = read_le<std::uint32_t>(payload, offset + 4 * i);
                const float f = std::bit_cast<float>(bits);
                if (!std::isfinite(f)) throw LoadError("weight container: " + label + " holds a non-finite value");
                values[i] = f;
            }
            return values;
        };

        // The whole manifest is validated before any payload is decoded.
        std::vector<std::pair<const json*, const json*>> located;
        for (const auto& spec : specs) {
            const json* kernel = find_entry(spec.name, "kernel");
            const json* bias = find_entry(spec.name, "bias");
            if (!kernel && !bias) throw LoadError("weight container: " + spec.name + " absent");
            if (!kernel) throw LoadError("weight container: " + spec.name + " kernel absent");
            if (!bias) throw LoadError("weight container: " + spec.name + " bias absent");
            located.emplace_back(kernel, bias);
        }
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& spec = specs[i];
            check_shape(*located[i].first, spec.name + " kernel", {spec.out_channels, spec.in_channels, 3, 3});
            check_shape(*located[i].second, spec.name + " bias", {spec.out_channels});
        }
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& spec = specs[i];
            ConvLayer layer;
            layer.spec = spec;
            layer.kernel = read_entry(*located[i].first, spec.name + " kernel", spec.out_channels * spec.in_channels * 9);
            layer.bias = read_entry(*located[i].second, spec.name + " bias", spec.out_channels);
            net.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("weight container: malformed manifest: ") + e.what());
    }
    return net;
}

NetworkWeights load_weights_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_weights(bytes);
}

void save_weights_file(const std::filesystem::path& path, const NetworkWeights& weights) {
    const auto bytes = write_weight_container(weights);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write weight file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing weight file " + path.string());
}

}  // namespace nst
