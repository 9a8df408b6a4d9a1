#pragma once

#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"
#include "gsgi/image.hpp"

namespace gsgi::agent {

// Network input for the configured variant: the 20-channel encoding, or the
// color rendering as a 3 x 160 x 160 tensor scaled to [0, 1].
Tensor observe(const GameState& state, const GameConfig& game,
               const DensityMap& density, InputVariant variant);

Tensor image_tensor(const Image& img);

}  // namespace gsgi::agent
