#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gsgi {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Interleaved 8-bit RGB raster, row-major from the top-left pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill = {255, 255, 255});

  Rgb get(int x, int y) const;
  void set(int x, int y, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);  // half-open

  friend bool operator==(const Image&, const Image&) = default;
};

// Binary PPM (P6, maxval 255).
std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);
void write_ppm(const Image& img, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

}  // namespace gsgi
