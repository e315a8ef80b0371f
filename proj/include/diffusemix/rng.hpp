#pragma once

#include <cstddef>
#include <cstdint>

namespace diffusemix {

// SplitMix64 finalizer (Stafford variant 13). A bijection on 64-bit words
// with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic random stream: SplitMix64 over a 64-bit state. Cheap to
// construct, so every (image, augmentation) pair owns its own stream.
class RngStream {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  explicit constexpr RngStream(std::uint64_t state)
      : initial_(state), state_(state) {}

  constexpr std::uint64_t initial_state() const { return initial_; }

  constexpr std::uint64_t next() {
    state_ += kGamma;
    return mix64(state_);
  }

  // Unbiased uniform index in [0, n), Lemire's multiply-shift with
  // rejection. n must be >= 1.
  constexpr std::size_t uniform_index(std::size_t n) {
    const auto bound = static_cast<std::uint64_t>(n);
    auto product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::size_t>(product >> 64);
  }

  // Uniform double in [0,1) with 53 random bits.
  constexpr double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t initial_;
  std::uint64_t state_;
};

// Stream state for augmentation `aug_index` of image `image_index`:
//   s0 = mix64(seed + gamma)
//   s1 = mix64(s0 ^ mix64(image_index + 0x632BE59BD9B4E019))
//   s2 = mix64(s1 ^ mix64(aug_index   + 0x8CB92BA72F3D8DD7))
// Independent of the order in which pairs are processed.
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::uint64_t image_index,
                                       std::uint64_t aug_index) {
  const std::uint64_t s0 = mix64(seed + RngStream::kGamma);
  const std::uint64_t s1 = mix64(s0 ^ mix64(image_index + 0x632BE59BD9B4E019ull));
  return mix64(s1 ^ mix64(aug_index + 0x8CB92BA72F3D8DD7ull));
}

constexpr RngStream derive_substream(std::uint64_t seed,
                                     std::uint64_t image_index,
                                     std::uint64_t aug_index) {
  return RngStream(substream_seed(seed, image_index, aug_index));
}

} // namespace diffusemix
