#include "diffusemix/masking.hpp"

#include "diffusemix/errors.hpp"
#include "diffusemix/kernels.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace diffusemix {
namespace {

constexpr std::array<MaskKind, 1> kVertical = {MaskKind::LeftOn};
constexpr std::array<MaskKind, 2> kVerticalHorizontal = {MaskKind::LeftOn,
                                                        MaskKind::TopOn};
constexpr std::array<MaskKind, 4> kFull = {MaskKind::LeftOn, MaskKind::RightOn,
                                          MaskKind::TopOn, MaskKind::BottomOn};

} // namespace

std::string_view to_string(MaskKind kind) {
  switch (kind) {
  case MaskKind::LeftOn: return "left_on";
  case MaskKind::RightOn: return "right_on";
  case MaskKind::TopOn: return "top_on";
  case MaskKind::BottomOn: return "bottom_on";
  }
  return "unknown";
}

std::optional<MaskKind> parse_mask_kind(std::string_view text) {
  for (MaskKind k : kFull) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

std::string_view to_string(MaskSet set) {
  switch (set) {
  case MaskSet::VerticalOnly: return "vertical";
  case MaskSet::VerticalHorizontal: return "vertical_horizontal";
  case MaskSet::Full: return "full";
  }
  return "unknown";
}

std::optional<MaskSet> parse_mask_set(std::string_view text) {
  for (MaskSet s : {MaskSet::VerticalOnly, MaskSet::VerticalHorizontal, MaskSet::Full}) {
    if (to_string(s) == text) {
      return s;
    }
  }
  return std::nullopt;
}

std::span<const MaskKind> mask_kinds(MaskSet set) {
  switch (set) {
  case MaskSet::VerticalOnly: return kVertical;
  case MaskSet::VerticalHorizontal: return kVerticalHorizontal;
  case MaskSet::Full: return kFull;
  }
  return kFull;
}

Mask::Mask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("mask dimensions must be >= 1");
  }
  if (fill > 1) {
    throw std::invalid_argument("mask fill must be 0 or 1");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::size_t Mask::popcount() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

Mask Mask::complement() const {
  Mask out = *this;
  for (auto &b : out.bits_) {
    b = static_cast<std::uint8_t>(1 - b);
  }
  return out;
}

Mask make_mask(int width, int height, MaskKind kind) {
  Mask mask(width, height);
  const int split_x = width / 2;
  const int split_y = height / 2;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool on = false;
      switch (kind) {
      case MaskKind::LeftOn: on = x < split_x; break;
      case MaskKind::RightOn: on = x >= split_x; break;
      case MaskKind::TopOn: on = y < split_y; break;
      case MaskKind::BottomOn: on = y >= split_y; break;
      }
      mask.set(x, y, on);
    }
  }
  return mask;
}

ImageBuffer concatenate(const ImageBuffer &original, const ImageBuffer &generated,
                        const Mask &mask) {
  if (!original.same_dims(generated) || mask.width() != original.width() ||
      mask.height() != original.height()) {
    throw DimensionMismatch(
        "concatenate: original " + std::to_string(original.width()) + "x" +
        std::to_string(original.height()) + ", generated " +
        std::to_string(generated.width()) + "x" + std::to_string(generated.height()) +
        ", mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  }
  ImageBuffer out(original.width(), original.height());
  kernels::masked_select(original.data(), generated.data(), mask.bits(),
                         out.mutable_data());
  return out;
}

MaskKind sample_mask_kind(MaskSet set, RngStream &rng) {
  const auto kinds = mask_kinds(set);
  return kinds[rng.uniform_index(kinds.size())];
}

} // namespace diffusemix
