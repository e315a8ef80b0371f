#include "diffusemix/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace diffusemix::kernels {
namespace {

constexpr int kCh = 3;

// Weights live on a 2^-29 grid: w and 1-w are then both exact, and each
// product with a 24-bit float channel fits a double mantissa, so swapping the
// operands together with lambda -> 1-lambda reproduces the same bits.
inline double snap_weight(double lambda) {
  constexpr double kGrid = 536870912.0; // 2^29
  return std::nearbyint(lambda * kGrid) / kGrid;
}

inline float blend_one(float base, float overlay, double w) {
  const double v = w * static_cast<double>(overlay) +
                   (1.0 - w) * static_cast<double>(base);
  return std::clamp(static_cast<float>(v), 0.0f, 1.0f);
}

struct Tap {
  int i0;
  int i1;
  float t;
};

inline Tap center_tap(int dst, int src_extent, int dst_extent) {
  const double s =
      (dst + 0.5) * static_cast<double>(src_extent) / dst_extent - 0.5;
  const double clamped = std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
  const int i0 = static_cast<int>(std::floor(clamped));
  const int i1 = std::min(i0 + 1, src_extent - 1);
  return {i0, i1, static_cast<float>(clamped - i0)};
}

inline float lerp(float a, float b, float t) { return a + (b - a) * t; }

inline void bilinear_row(std::span<const float> src, int src_w, int src_h,
                         std::span<float> dst, int dst_w, int dst_h, int y) {
  const Tap ty = center_tap(y, src_h, dst_h);
  const float *row0 = src.data() + static_cast<std::size_t>(ty.i0) * src_w * kCh;
  const float *row1 = src.data() + static_cast<std::size_t>(ty.i1) * src_w * kCh;
  float *out = dst.data() + static_cast<std::size_t>(y) * dst_w * kCh;
  for (int x = 0; x < dst_w; ++x) {
    const Tap tx = center_tap(x, src_w, dst_w);
    for (int c = 0; c < kCh; ++c) {
      const float top = lerp(row0[tx.i0 * kCh + c], row0[tx.i1 * kCh + c], tx.t);
      const float bottom =
          lerp(row1[tx.i0 * kCh + c], row1[tx.i1 * kCh + c], tx.t);
      out[x * kCh + c] = std::clamp(lerp(top, bottom, ty.t), 0.0f, 1.0f);
    }
  }
}

} // namespace

void masked_select(std::span<const float> original,
                   std::span<const float> generated,
                   std::span<const std::uint8_t> mask, std::span<float> out) {
  const auto pixels = static_cast<std::ptrdiff_t>(mask.size());
#pragma omp parallel for schedule(static) if (out.size() >= kParallelThreshold)
  for (std::ptrdiff_t p = 0; p < pixels; ++p) {
    const auto &src = mask[p] ? generated : original;
    for (int c = 0; c < kCh; ++c) {
      out[p * kCh + c] = src[p * kCh + c];
    }
  }
}

void lerp_blend(std::span<const float> base, std::span<const float> overlay,
                double lambda, std::span<float> out) {
  const double w = snap_weight(lambda);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for simd schedule(static) if (out.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = blend_one(base[i], overlay[i], w);
  }
}

void bilinear(std::span<const float> src, int src_w, int src_h,
              std::span<float> dst, int dst_w, int dst_h) {
#pragma omp parallel for schedule(static) if (dst.size() >= kParallelThreshold)
  for (int y = 0; y < dst_h; ++y) {
    bilinear_row(src, src_w, src_h, dst, dst_w, dst_h, y);
  }
}

namespace serial {

void masked_select(std::span<const float> original,
                   std::span<const float> generated,
                   std::span<const std::uint8_t> mask, std::span<float> out) {
  for (std::size_t p = 0; p < mask.size(); ++p) {
    const auto &src = mask[p] ? generated : original;
    for (int c = 0; c < kCh; ++c) {
      out[p * kCh + c] = src[p * kCh + c];
    }
  }
}

void lerp_blend(std::span<const float> base, std::span<const float> overlay,
                double lambda, std::span<float> out) {
  const double w = snap_weight(lambda);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = blend_one(base[i], overlay[i], w);
  }
}

void bilinear(std::span<const float> src, int src_w, int src_h,
              std::span<float> dst, int dst_w, int dst_h) {
  for (int y = 0; y < dst_h; ++y) {
    bilinear_row(src, src_w, src_h, dst, dst_w, dst_h, y);
  }
}

} // namespace serial
} // namespace diffusemix::kernels
