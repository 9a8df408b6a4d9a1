#include "gsgi/obs.hpp"

#include <algorithm>
#include <cmath>

namespace gsgi {

nn::Tensor encode_observation(const GameState& state, const GameConfig& config,
                              const DensityMap& density) {
  const int n = config.grid_side;
  nn::Tensor obs({kObsChannels, n, n});
  const double time = static_cast<double>(state.t) / config.horizon;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int idx = r * n + c;
      const FootprintMask seen =
          agent_prints(state.known_attacker_prints[idx], Agent::attacker);
      const FootprintMask own =
          agent_prints(state.footprints[idx], Agent::patroller);
      for (int k = 0; k < 8; ++k) {
        obs.at(channel::attacker_prints + k, r, c) = (seen >> k) & 1;
        obs.at(channel::patroller_prints + k, r, c) = (own >> k) & 1;
      }
      obs.at(channel::density, r, c) = density.at(r, c);
      obs.at(channel::trail, r, c) = 0.1 * state.visits[idx];
      obs.at(channel::time, r, c) = time;
    }
  }
  obs.at(channel::position, state.patroller.row, state.patroller.col) = 1.0;
  return obs;
}

int cell_pixel_start(int j, int grid_side) {
  return j * kImageSide / grid_side;
}

namespace {

std::uint8_t blend(std::uint8_t base, std::uint8_t over, double alpha) {
  return static_cast<std::uint8_t>(
      std::lround((1.0 - alpha) * base + alpha * over));
}

// Border rectangle for a tick on one side of a cell, `inset` pixels inside
// the grid line.
void draw_tick(Image& img, int x0, int y0, int x1, int y1, Heading side,
               int inset) {
  const int w = x1 - x0;
  const int h = y1 - y0;
  const int ax = x0 + w / 3;
  const int bx = x0 + (2 * w) / 3;
  const int ay = y0 + h / 3;
  const int by = y0 + (2 * h) / 3;
  switch (side) {
    case Heading::north:
      img.fill_rect(ax, y0 + inset, bx, y0 + inset + 2, palette::footprint);
      break;
    case Heading::south:
      img.fill_rect(ax, y1 - inset - 2, bx, y1 - inset, palette::footprint);
      break;
    case Heading::west:
      img.fill_rect(x0 + inset, ay, x0 + inset + 2, by, palette::footprint);
      break;
    case Heading::east:
      img.fill_rect(x1 - inset - 2, ay, x1 - inset, by, palette::footprint);
      break;
  }
}

Heading opposite(Heading h) {
  switch (h) {
    case Heading::north:
      return Heading::south;
    case Heading::south:
      return Heading::north;
    case Heading::east:
      return Heading::west;
    case Heading::west:
      return Heading::east;
  }
  return h;
}

}  // namespace

Image render_color(const GameState& state, const GameConfig& config,
                   const DensityMap& density) {
  const int n = config.grid_side;
  Image img(kImageSide, kImageSide, palette::background);

  for (int r = 0; r < n; ++r) {
    const int y0 = cell_pixel_start(r, n);
    const int y1 = cell_pixel_start(r + 1, n);
    for (int c = 0; c < n; ++c) {
      const int x0 = cell_pixel_start(c, n);
      const int x1 = cell_pixel_start(c + 1, n);
      const double p = density.at(r, c);
      Rgb color{0, static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - p))),
                0};
      const double alpha = std::min(
          1.0, palette::trail_alpha_per_visit * state.visits[r * n + c]);
      color = {blend(color.r, palette::patroller.r, alpha),
               blend(color.g, palette::patroller.g, alpha),
               blend(color.b, palette::patroller.b, alpha)};
      img.fill_rect(x0, y0, x1, y1, color);
    }
  }

  for (int j = 0; j < n; ++j) {
    const int p = cell_pixel_start(j, n);
    img.fill_rect(p, 0, p + 1, kImageSide, palette::grid);
    img.fill_rect(0, p, kImageSide, p + 1, palette::grid);
  }
  img.fill_rect(kImageSide - 1, 0, kImageSide, kImageSide, palette::grid);
  img.fill_rect(0, kImageSide - 1, kImageSide, kImageSide, palette::grid);

  // Leaving ticks sit on the side the attacker walked out of; entering ticks
  // on the side she came in through, drawn further inside the cell.
  for (int r = 0; r < n; ++r) {
    const int y0 = cell_pixel_start(r, n);
    const int y1 = cell_pixel_start(r + 1, n);
    for (int c = 0; c < n; ++c) {
      const int x0 = cell_pixel_start(c, n);
      const int x1 = cell_pixel_start(c + 1, n);
      const FootprintMask seen =
          agent_prints(state.known_attacker_prints[r * n + c], Agent::attacker);
      for (int h = 0; h < 4; ++h) {
        const auto heading = static_cast<Heading>(h);
        if (seen & (1u << (h * 2 + static_cast<int>(Sense::leaving)))) {
          draw_tick(img, x0, y0, x1, y1, heading, 2);
        }
        if (seen & (1u << (h * 2 + static_cast<int>(Sense::entering)))) {
          draw_tick(img, x0, y0, x1, y1, opposite(heading), 5);
        }
      }
    }
  }

  const int pr = state.patroller.row;
  const int pc = state.patroller.col;
  const int x0 = cell_pixel_start(pc, n);
  const int x1 = cell_pixel_start(pc + 1, n);
  const int y0 = cell_pixel_start(pr, n);
  const int y1 = cell_pixel_start(pr + 1, n);
  const int mw = (x1 - x0) / 3;
  const int mh = (y1 - y0) / 3;
  img.fill_rect(x0 + mw, y0 + mh, x1 - mw, y1 - mh, palette::patroller);
  return img;
}

}  // namespace gsgi
