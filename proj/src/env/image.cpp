#include "gsgi/image.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gsgi/errors.hpp"

namespace gsgi {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb Image::get(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::clamp(x0, 0, width);
  x1 = std::clamp(x1, 0, width);
  y0 = std::clamp(y0, 0, height);
  y1 = std::clamp(y1, 0, height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) set(x, y, c);
  }
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()),
             img.pixels.size());
  return out;
}

Image decode_ppm(const std::string& bytes) {
  std::istringstream is(bytes);
  std::string magic;
  int w = 0;
  int h = 0;
  int maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (!is || magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
    throw FormatError("not a P6 PPM with maxval 255");
  }
  is.get();
  Image img(w, h);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("truncated PPM pixel data");
  }
  return img;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const std::string bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_ppm(ss.str());
}

}  // namespace gsgi
