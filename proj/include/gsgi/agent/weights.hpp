#pragma once

// MAA3C-W1 weight files: a plain-text manifest followed by little-endian
// float64 arrays.
//
//   MAA3C-W1
//   config input_variant=encoded_20ch use_convlstm=1 feature_channels=64 mlp_hidden=128 grid_side=7
//   tensor features.conv0.kernel f64 64x20x3x3 0
//   ...                                    (name dtype shape byte-offset)
//   end
//   <raw bytes, offsets relative to the first byte after "end\n">

#include <cstdint>
#include <filesystem>
#include <string>

#include "gsgi/agent/network.hpp"

namespace gsgi::agent {

inline constexpr const char* kWeightsMagic = "MAA3C-W1";

std::string encode_weights(const Network& net);
Network decode_weights(const std::string& bytes);

void save_weights(const Network& net, const std::filesystem::path& path);
// Throws FormatError naming the offending tensor on corrupt input.
Network load_weights(const std::filesystem::path& path);
// Also rejects files whose manifest differs from `expected`, listing the
// differing entries.
Network load_weights(const std::filesystem::path& path,
                     const NetworkConfig& expected);

std::string format_network_config(const NetworkConfig& cfg);

// FNV-1a 64 over the little-endian parameter bytes.
std::uint64_t weights_checksum(const Network& net);

}  // namespace gsgi::agent
