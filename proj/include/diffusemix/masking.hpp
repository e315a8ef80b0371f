#pragma once

#include "diffusemix/image.hpp"
#include "diffusemix/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace diffusemix {

// Which half of the frame is taken from the generated image.
enum class MaskKind : std::uint8_t { LeftOn, RightOn, TopOn, BottomOn };

constexpr MaskKind flip(MaskKind kind) {
  switch (kind) {
  case MaskKind::LeftOn: return MaskKind::RightOn;
  case MaskKind::RightOn: return MaskKind::LeftOn;
  case MaskKind::TopOn: return MaskKind::BottomOn;
  case MaskKind::BottomOn: return MaskKind::TopOn;
  }
  return kind;
}

// "left_on", "right_on", "top_on", "bottom_on"
std::string_view to_string(MaskKind kind);
std::optional<MaskKind> parse_mask_kind(std::string_view text);

// Mask families, matching the three ablation rows: vertical split only,
// vertical + horizontal, and both with their flipped complements.
enum class MaskSet { VerticalOnly, VerticalHorizontal, Full };

std::string_view to_string(MaskSet set);
std::optional<MaskSet> parse_mask_set(std::string_view text);
std::span<const MaskKind> mask_kinds(MaskSet set);

// Binary single-channel plane, one byte per pixel, values exactly 0 or 1.
class Mask {
public:
  Mask(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::uint8_t at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, bool on) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
  }
  std::size_t popcount() const;
  Mask complement() const;

  friend bool operator==(const Mask &, const Mask &) = default;

private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

// Splits the frame at floor(w/2) (columns) or floor(h/2) (rows). LeftOn and
// TopOn turn on the first part, RightOn and BottomOn the remainder.
Mask make_mask(int width, int height, MaskKind kind);

// hybrid = generated where mask is 1, original where mask is 0.
ImageBuffer concatenate(const ImageBuffer &original, const ImageBuffer &generated,
                        const Mask &mask);

MaskKind sample_mask_kind(MaskSet set, RngStream &rng);

} // namespace diffusemix
