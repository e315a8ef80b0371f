#include "diffusemix/stylize.hpp"

#include "diffusemix/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace diffusemix {
namespace {

using Rgb = std::array<float, 3>;

enum class Recipe {
  Autumn,
  Snowy,
  Sunset,
  Watercolor,
  Rainbow,
  Aurora,
  Mosaic,
  UkiyoE,
  Crayon,
  Neutral
};

Recipe recipe_for(std::string_view prompt) {
  if (prompt == "autumn") return Recipe::Autumn;
  if (prompt == "snowy") return Recipe::Snowy;
  if (prompt == "sunset") return Recipe::Sunset;
  if (prompt == "watercolor art") return Recipe::Watercolor;
  if (prompt == "rainbow") return Recipe::Rainbow;
  if (prompt == "aurora") return Recipe::Aurora;
  if (prompt == "mosaic") return Recipe::Mosaic;
  if (prompt == "ukiyo-e") return Recipe::UkiyoE;
  if (prompt == "a sketch with crayon") return Recipe::Crayon;
  return Recipe::Neutral;
}

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

float luma(const Rgb &c) { return 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2]; }

Rgb pixel(const ImageBuffer &img, int x, int y) {
  x = std::clamp(x, 0, img.width() - 1);
  y = std::clamp(y, 0, img.height() - 1);
  return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
}

float sobel_magnitude(const ImageBuffer &img, int x, int y) {
  float l[3][3];
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      l[dy + 1][dx + 1] = luma(pixel(img, x + dx, y + dy));
    }
  }
  const float gx = (l[0][2] + 2 * l[1][2] + l[2][2]) - (l[0][0] + 2 * l[1][0] + l[2][0]);
  const float gy = (l[2][0] + 2 * l[2][1] + l[2][2]) - (l[0][0] + 2 * l[0][1] + l[0][2]);
  return std::sqrt(gx * gx + gy * gy) / 4.0f;
}

float grain(int x, int y) {
  const auto h = mix64((static_cast<std::uint64_t>(y) << 32) |
                       static_cast<std::uint32_t>(x));
  return static_cast<float>(h >> 40) / static_cast<float>(1u << 24);
}

Rgb mix(const Rgb &a, const Rgb &b, float t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
          a[2] + t * (b[2] - a[2])};
}

Rgb apply_pointwise(Recipe recipe, const ImageBuffer &img, int x, int y) {
  const Rgb c = pixel(img, x, y);
  const float w = static_cast<float>(img.width());
  const float h = static_cast<float>(img.height());
  constexpr float two_pi = 2.0f * std::numbers::pi_v<float>;
  switch (recipe) {
  case Recipe::Autumn:
    return {c[0] * 1.12f + 0.06f, c[1] * 0.95f + 0.03f, c[2] * 0.70f};
  case Recipe::Snowy: {
    const float l = luma(c);
    const Rgb d = mix(c, {l, l, l}, 0.65f);
    return {0.3f + 0.7f * d[0], 0.3f + 0.7f * d[1], 0.33f + 0.7f * d[2]};
  }
  case Recipe::Sunset: {
    const float top = 1.0f - (static_cast<float>(y) + 0.5f) / h;
    return mix(c, {1.0f, 0.50f, 0.15f}, 0.15f + 0.35f * top);
  }
  case Recipe::Watercolor: {
    Rgb sum{0, 0, 0};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Rgb n = pixel(img, x + dx, y + dy);
        for (int k = 0; k < 3; ++k) sum[k] += n[k];
      }
    }
    Rgb out;
    const float l = luma({sum[0] / 9, sum[1] / 9, sum[2] / 9});
    for (int k = 0; k < 3; ++k) {
      const float sat = l + 1.25f * (sum[k] / 9 - l);
      out[k] = 0.08f + 0.92f * sat;
    }
    return out;
  }
  case Recipe::Rainbow: {
    const float hue = (static_cast<float>(x) + 0.5f) / w;
    const Rgb band{0.5f + 0.5f * std::cos(two_pi * hue),
                   0.5f + 0.5f * std::cos(two_pi * (hue - 1.0f / 3.0f)),
                   0.5f + 0.5f * std::cos(two_pi * (hue - 2.0f / 3.0f))};
    return mix(c, band, 0.3f);
  }
  case Recipe::Aurora: {
    const float t = 0.5f + 0.5f * std::sin(two_pi * (3.0f * (static_cast<float>(y) + 0.5f) / h +
                                                     0.6f * (static_cast<float>(x) + 0.5f) / w));
    const Rgb glow = mix({0.2f, 1.0f, 0.6f}, {0.6f, 0.2f, 0.9f}, t);
    Rgb out;
    for (int k = 0; k < 3; ++k) {
      const float base = 0.6f * c[k];
      out[k] = 1.0f - (1.0f - base) * (1.0f - 0.45f * glow[k]);
    }
    return out;
  }
  case Recipe::UkiyoE: {
    const float edge = std::min(1.0f, 2.0f * sobel_magnitude(img, x, y));
    Rgb out;
    for (int k = 0; k < 3; ++k) {
      const float level = std::min(3.0f, std::floor(c[k] * 4.0f));
      out[k] = (level / 3.0f) * (1.0f - 0.7f * edge);
    }
    return out;
  }
  case Recipe::Crayon: {
    const float edge = std::min(1.0f, 1.5f * sobel_magnitude(img, x, y));
    const float tone = 0.65f * (1.0f - edge) + 0.35f * luma(c);
    const float g = 0.06f * grain(x, y);
    return {tone * 0.95f - g, tone * 0.90f - g, tone * 0.80f - g};
  }
  case Recipe::Neutral:
  case Recipe::Mosaic:
    break;
  }
  Rgb out;
  for (int k = 0; k < 3; ++k) {
    const float s = c[k] * c[k] * (3.0f - 2.0f * c[k]);
    out[k] = 0.5f * c[k] + 0.5f * s;
  }
  return out;
}

ImageBuffer mosaic(const ImageBuffer &img, int block) {
  ImageBuffer out(img.width(), img.height());
  const int bw = (img.width() + block - 1) / block;
  const int bh = (img.height() + block - 1) / block;
#pragma omp parallel for schedule(static) if (img.size() >= (1u << 15))
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      const int x0 = bx * block;
      const int y0 = by * block;
      const int x1 = std::min(x0 + block, img.width());
      const int y1 = std::min(y0 + block, img.height());
      double sum[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          for (int k = 0; k < 3; ++k) sum[k] += img.at(x, y, k);
        }
      }
      const double n = static_cast<double>((x1 - x0) * (y1 - y0));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          for (int k = 0; k < 3; ++k) {
            out.at(x, y, k) = static_cast<float>(sum[k] / n);
          }
        }
      }
    }
  }
  return out;
}

} // namespace

ImageBuffer procedural_stylize(const ImageBuffer &img, std::string_view prompt,
                               float strength, const StylizeOptions &options) {
  if (!(strength >= 0.0f && strength <= 1.0f)) {
    throw std::invalid_argument("stylize strength must be in [0,1]");
  }
  if (options.mosaic_block < 1) {
    throw std::invalid_argument("mosaic block size must be >= 1");
  }
  if (strength == 0.0f) {
    return img;
  }
  const Recipe recipe = recipe_for(prompt);
  ImageBuffer effect = recipe == Recipe::Mosaic
                           ? mosaic(img, options.mosaic_block)
                           : ImageBuffer(img.width(), img.height());
  if (recipe != Recipe::Mosaic) {
#pragma omp parallel for schedule(static) if (img.size() >= (1u << 15))
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const Rgb v = apply_pointwise(recipe, img, x, y);
        for (int k = 0; k < 3; ++k) effect.at(x, y, k) = clamp01(v[k]);
      }
    }
  }
  if (strength == 1.0f) {
    return effect;
  }
  const auto src = img.data();
  auto dst = effect.mutable_data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = clamp01(src[i] + strength * (dst[i] - src[i]));
  }
  return effect;
}

} // namespace diffusemix
