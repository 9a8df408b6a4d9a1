#include "gsgi/interp/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsgi/errors.hpp"

namespace gsgi::interp {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

Rgb heat_color(double v) {
  return {to_byte(255.0 * v), 0, to_byte(255.0 * (1.0 - v))};
}

std::vector<double> upsample(std::span<const double> grid, int rows, int cols,
                             int width, int height, Upsample mode) {
  if (rows < 1 || cols < 1 || grid.size() != static_cast<std::size_t>(rows) * cols) {
    throw UsageError("mask size does not match its dimensions");
  }
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  const double sy = static_cast<double>(rows) / height;
  const double sx = static_cast<double>(cols) / width;
  auto at = [&](int r, int c) { return grid[static_cast<std::size_t>(r) * cols + c]; };
  for (int y = 0; y < height; ++y) {
    const double gy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double gx = (x + 0.5) * sx - 0.5;
      double v = 0.0;
      if (mode == Upsample::nearest) {
        const int r = std::clamp(static_cast<int>(std::floor((y + 0.5) * sy)), 0, rows - 1);
        const int c = std::clamp(static_cast<int>(std::floor((x + 0.5) * sx)), 0, cols - 1);
        v = at(r, c);
      } else {
        const double cy = std::clamp(gy, 0.0, rows - 1.0);
        const double cx = std::clamp(gx, 0.0, cols - 1.0);
        const int r0 = static_cast<int>(std::floor(cy));
        const int c0 = static_cast<int>(std::floor(cx));
        const int r1 = std::min(r0 + 1, rows - 1);
        const int c1 = std::min(c0 + 1, cols - 1);
        const double fy = cy - r0;
        const double fx = cx - c0;
        const double top = at(r0, c0) * (1.0 - fx) + at(r0, c1) * fx;
        const double bottom = at(r1, c0) * (1.0 - fx) + at(r1, c1) * fx;
        v = top * (1.0 - fy) + bottom * fy;
      }
      out[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return out;
}

Image overlay_heatmap(const Image& base, std::span<const double> mask, int rows,
                      int cols, Upsample mode) {
  for (double v : mask) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("mask values must lie in [0, 1]");
  }
  const auto up = upsample(mask, rows, cols, base.width, base.height, mode);
  Image out = base;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      const Rgb b = base.get(x, y);
      const Rgb h = heat_color(up[static_cast<std::size_t>(y) * base.width + x]);
      auto blend = [](std::uint8_t under, std::uint8_t over) {
        return to_byte((1.0 - kOverlayAlpha) * under + kOverlayAlpha * over);
      };
      out.set(x, y, {blend(b.r, h.r), blend(b.g, h.g), blend(b.b, h.b)});
    }
  }
  return out;
}

void write_overlay(const Image& base, std::span<const double> mask, int rows,
                   int cols, const std::filesystem::path& path, Upsample mode) {
  write_ppm(overlay_heatmap(base, mask, rows, cols, mode), path);
}

}  // namespace gsgi::interp
