#pragma once

// Per-pixel kernels shared by the compositing modules. The default entry
// points are OpenMP-parallel over rows/elements; the `serial` namespace keeps
// straight loops with identical arithmetic, used as the reference in tests
// and as the baseline in the benchmark. Both must produce bit-identical
// output.

#include <cstddef>
#include <cstdint>
#include <span>

namespace diffusemix::kernels {

// Element count below which the parallel kernels stay single-threaded.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

// out[p,c] = mask[p] ? generated[p,c] : original[p,c]  (3 channels/pixel)
void masked_select(std::span<const float> original,
                   std::span<const float> generated,
                   std::span<const std::uint8_t> mask, std::span<float> out);

// out = lambda * overlay + (1 - lambda) * base, evaluated in double and
// rounded once to float, clamped to [0,1]. lambda is first snapped to the
// nearest multiple of 2^-29 (a shift of at most 1e-9).
void lerp_blend(std::span<const float> base, std::span<const float> overlay,
                double lambda, std::span<float> out);

// Center-aligned bilinear resampling of a 3-channel interleaved image.
void bilinear(std::span<const float> src, int src_w, int src_h,
              std::span<float> dst, int dst_w, int dst_h);

namespace serial {

void masked_select(std::span<const float> original,
                   std::span<const float> generated,
                   std::span<const std::uint8_t> mask, std::span<float> out);

void lerp_blend(std::span<const float> base, std::span<const float> overlay,
                double lambda, std::span<float> out);

void bilinear(std::span<const float> src, int src_w, int src_h,
              std::span<float> dst, int dst_w, int dst_h);

} // namespace serial
} // namespace diffusemix::kernels
