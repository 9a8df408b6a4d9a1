#pragma once

// Patroller-side views of a game: the 20-channel encoded array and a
// 160x160 color rendering. Neither reveals the attacker's position.

#include "gsgi/env.hpp"
#include "gsgi/image.hpp"
#include "gsgi/nn/tensor.hpp"

namespace gsgi {

inline constexpr int kObsChannels = 20;
inline constexpr int kImageSide = 160;

// Channel layout (0-based):
//   0..7   attacker footprints known to the patroller, heading-major
//          {north, west, east, south} x {entering, leaving}
//   8..15  patroller footprints, same order
//   16     patroller position (one-hot)
//   17     animal density
//   18     trail: 0.1 per visit
//   19     t / horizon, constant across cells
namespace channel {
inline constexpr int attacker_prints = 0;
inline constexpr int patroller_prints = 8;
inline constexpr int position = 16;
inline constexpr int density = 17;
inline constexpr int trail = 18;
inline constexpr int time = 19;
}  // namespace channel

// Tensor of shape 20 x grid_side x grid_side.
nn::Tensor encode_observation(const GameState& state, const GameConfig& config,
                              const DensityMap& density);

// Palette used by render_color.
namespace palette {
inline constexpr Rgb background{255, 255, 255};
inline constexpr Rgb patroller{0, 0, 255};
inline constexpr Rgb footprint{255, 0, 0};
inline constexpr Rgb grid{0, 0, 0};
inline constexpr double trail_alpha_per_visit = 0.1;
}  // namespace palette

// First pixel of cell index j along one axis: floor(j * 160 / grid_side).
int cell_pixel_start(int j, int grid_side);

Image render_color(const GameState& state, const GameConfig& config,
                   const DensityMap& density);

}  // namespace gsgi
