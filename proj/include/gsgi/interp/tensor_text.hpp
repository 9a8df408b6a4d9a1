#pragma once

// Plain-text tensors: the first line holds the space-separated shape, then
// the values follow in row-major order with one innermost row per line.
// Values carry 17 significant digits, so parsing restores them exactly.

#include <filesystem>
#include <string>
#include <string_view>

#include "gsgi/nn/tensor.hpp"

namespace gsgi::interp {

std::string format_tensor(const nn::Tensor& t);
// Throws FormatError on malformed text.
nn::Tensor parse_tensor(std::string_view text);

void save_tensor(const nn::Tensor& t, const std::filesystem::path& path);
nn::Tensor load_tensor(const std::filesystem::path& path);

// Shortest-exact decimal form used throughout the text formats.
std::string format_double(double x);

}  // namespace gsgi::interp
