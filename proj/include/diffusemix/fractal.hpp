#pragma once

#include "diffusemix/image.hpp"
#include "diffusemix/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

namespace diffusemix {

inline constexpr double kDefaultLambda = 0.2;
inline constexpr int kMinFractalSize = 16;

// Renders an iterated-function-system attractor: 3-6 seeded contractive
// affine maps, chaos-game sampling, log-density tone mapping over a seeded
// three-colour gradient. Deterministic for fixed (seed, width, height).
// Requires width, height >= 16.
ImageBuffer generate_fractal(std::uint64_t seed, int width, int height);

// Immutable pool of fractal images, addressed by id.
//  - directory mode: ids are the decodable file names, sorted
//    lexicographically;
//  - procedural mode: ids "procedural-NNNN", each rendered by
//    generate_fractal with a per-index seed.
// Fitted images (cover-cropped to a target size) are memoized.
class FractalSource {
public:
  static FractalSource from_directory(const std::filesystem::path &dir);
  static FractalSource procedural(std::size_t count, std::uint64_t seed);

  const std::vector<std::string> &ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool is_procedural() const { return procedural_; }
  // "dir:<path>" or "procedural:<count>,seed=<n>"
  std::string descriptor() const;
  // Files in a directory source that failed to decode and were skipped.
  const std::vector<std::string> &skipped() const { return skipped_; }

  // Full-size image for an id. Procedural ids render at the given size
  // (at least 16x16); directory ids ignore it.
  ImageBuffer resolve(const std::string &id, int width = 256, int height = 256) const;

  // The id's image cover-cropped to exactly (width, height).
  std::shared_ptr<const ImageBuffer> fitted(const std::string &id, int width,
                                           int height) const;

private:
  FractalSource() = default;
  std::uint64_t item_seed(std::size_t index) const;
  std::size_t index_of(const std::string &id) const;

  static constexpr std::size_t kMemoCapacity = 1024;

  struct Memo {
    std::shared_mutex mutex;
    std::map<std::tuple<std::string, int, int>, std::shared_ptr<const ImageBuffer>> items;
  };

  bool procedural_ = false;
  std::filesystem::path dir_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> skipped_;
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

// Same as FractalSource::from_directory. EmptyFractalSet when the directory
// holds no files; DecodeError when none of them decode.
FractalSource load_fractal_dir(const std::filesystem::path &dir);

// out = lambda * fractal + (1 - lambda) * hybrid, per channel.
// LambdaOutOfRange unless 0 <= lambda <= 1; DimensionMismatch unless the
// two images share dimensions (fit the fractal with cover_crop_resize).
ImageBuffer blend(const ImageBuffer &hybrid, const ImageBuffer &fractal,
                  double lambda);

const std::string &sample_fractal(const FractalSource &source, RngStream &rng);

} // namespace diffusemix
