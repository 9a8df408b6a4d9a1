#include "gsgi/agent/observe.hpp"

#include "gsgi/obs.hpp"

namespace gsgi::agent {

Tensor image_tensor(const Image& img) {
  Tensor t({3, img.height, img.width});
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Rgb c = img.get(x, y);
      t.at(0, y, x) = c.r / 255.0;
      t.at(1, y, x) = c.g / 255.0;
      t.at(2, y, x) = c.b / 255.0;
    }
  }
  return t;
}

Tensor observe(const GameState& state, const GameConfig& game,
               const DensityMap& density, InputVariant variant) {
  if (variant == InputVariant::encoded_20ch) {
    return encode_observation(state, game, density);
  }
  return image_tensor(render_color(state, game, density));
}

}  // namespace gsgi::agent
