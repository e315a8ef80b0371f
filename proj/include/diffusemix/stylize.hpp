#pragma once

#include "diffusemix/image.hpp"

#include <string_view>

namespace diffusemix {

// Bumped whenever any recipe below changes its output; it is part of the
// procedural backend id and therefore of every cache key.
inline constexpr int kStylizeRecipeVersion = 1;

struct StylizeOptions {
  int mosaic_block = 4;
};

// Deterministic, structure-preserving stand-in for an image-to-image model.
// Each of the default prompts maps to a fixed global "filter" recipe that
// depends only on a pixel's position and its 3x3 neighbourhood (or its
// mosaic block):
//
//   autumn                warm channel rebalance
//   snowy                 desaturate toward luma, lift to >= 0.3, cool tint
//   sunset                orange overlay, strongest at the top row
//   watercolor art        3x3 box blur, saturation boost, lifted blacks
//   rainbow               hue gradient across columns, 30% overlay
//   aurora                green/violet diagonal bands, screen blend
//   mosaic                block-mean pixelation (StylizeOptions::mosaic_block)
//   ukiyo-e               4-level posterize, Sobel edges darkened
//   a sketch with crayon  inverted edge map toned by luma, tinted grain
//   anything else         neutral smoothstep tone curve
//
// The recipe result E is mixed with the input as in + strength * (E - in),
// so strength 0 returns the input bit-exact.
ImageBuffer procedural_stylize(const ImageBuffer &img, std::string_view prompt,
                               float strength,
                               const StylizeOptions &options = {});

} // namespace diffusemix
