#pragma once

// Attention-mask heatmaps blended over rendered game frames.

#include <filesystem>
#include <span>

#include "gsgi/image.hpp"

namespace gsgi::interp {

enum class Upsample { bilinear, nearest };

inline constexpr double kOverlayAlpha = 0.45;

// Blue (0) to red (1): (round(255 v), 0, round(255 (1 - v))).
Rgb heat_color(double v);

// Resamples a row-major rows x cols grid to width x height. Pixel centers map
// back onto the grid, with samples clamped at the border.
std::vector<double> upsample(std::span<const double> grid, int rows, int cols,
                             int width, int height, Upsample mode);

// Throws UsageError on a value outside [0, 1] or a size mismatch.
Image overlay_heatmap(const Image& base, std::span<const double> mask, int rows,
                      int cols, Upsample mode = Upsample::bilinear);

void write_overlay(const Image& base, std::span<const double> mask, int rows,
                   int cols, const std::filesystem::path& path,
                   Upsample mode = Upsample::bilinear);

}  // namespace gsgi::interp
