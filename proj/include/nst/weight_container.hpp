#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nst/network.hpp"

namespace nst {

// Layout of a weight container:
//   [8 bytes]  magic "NSTWGT01"
//   [8 bytes]  little-endian u64 manifest length N
//   [N bytes]  UTF-8 JSON manifest
//   [P bytes]  payload of little-endian f32 values
//   [4 bytes]  little-endian CRC32 of the payload
//
// The manifest holds "architecture" ("vgg19" or "custom"), "pooling",
// "input" {"channel_order", "mean"}, an optional "layers" table (required
// for custom networks) and "entries", one per kernel and bias:
//   {"name", "kind": "kernel"|"bias", "shape", "dtype": "f32",
//    "byte_offset", "byte_length"}  (offsets relative to the payload).
inline constexpr std::string_view kContainerMagic = "NSTWGT01";

std::vector<std::uint8_t> write_weight_container(const NetworkWeights& weights);
NetworkWeights load_weights(std::span<const std::uint8_t> container);

NetworkWeights load_weights_file(const std::filesystem::path& path);
void save_weights_file(const std::filesystem::path& path, const NetworkWeights& weights);

}  // namespace nst
