#pragma once

#include "diffusemix/digest.hpp"
#include "diffusemix/fractal.hpp"
#include "diffusemix/generator.hpp"
#include "diffusemix/image.hpp"
#include "diffusemix/masking.hpp"
#include "diffusemix/prompts.hpp"
#include "diffusemix/rng.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace diffusemix {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kManifestFile = "manifest.jsonl";
inline constexpr std::string_view kManifestMetaFile = "manifest.meta.json";

struct AugmentationConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  int m = 1;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;
  MaskSet mask_set = MaskSet::Full;
  PromptLibrary prompts = default_library();
  std::shared_ptr<const GeneratorBackend> backend;
  std::shared_ptr<const FractalSource> fractals;
  int workers = 1;
  std::optional<std::filesystem::path> cache_dir;

  // ConfigError describing the first violated constraint.
  void validate() const;
};

// SHA-256 of the canonical JSON form of everything that determines output
// content: m, lambda, seed, mask set, prompts and template, backend id and
// fractal source. Paths, worker count and cache location are excluded.
Digest256 config_digest(const AugmentationConfig &cfg);

struct DrawLog {
  std::string prompt;
  MaskKind mask_kind = MaskKind::LeftOn;
  std::string fractal_id;
};

// Intermediate images of one augmentation, in generation order.
struct AugmentStages {
  ImageBuffer generated; // backend output resized to the source dims
  Mask mask{1, 1};
  ImageBuffer hybrid;
  std::shared_ptr<const ImageBuffer> fractal; // fitted to the source dims
};

struct AugmentOutput {
  ImageBuffer image;
  DrawLog draws;
  AugmentStages stages;
};

// Test seam: replaces the sampled mask plane (the kind is still drawn so
// the random stream advances identically).
struct AugmentHooks {
  std::optional<Mask> force_mask;
};

// One source image through prompt -> generate -> mask -> concatenate ->
// fractal -> blend. Holds the optional generation cache and counters; safe
// to share across workers.
class Augmenter {
public:
  explicit Augmenter(const AugmentationConfig &cfg);

  AugmentOutput augment_one(const ImageBuffer &image, RngStream &rng,
                            const AugmentHooks &hooks = {}) const;

  ImageBuffer generate(const ImageBuffer &image, const std::string &prompt) const;

  std::uint64_t backend_calls() const { return backend_calls_.load(); }
  std::uint64_t cache_hits() const { return cache_ ? cache_->hits() : 0; }
  std::uint64_t cache_misses() const { return cache_ ? cache_->misses() : 0; }

private:
  class CountingBackend;

  AugmentationConfig cfg_;
  std::shared_ptr<GeneratorBackend> counting_;
  std::unique_ptr<GenerationCache> cache_;
  mutable std::atomic<std::uint64_t> backend_calls_{0};
};

AugmentOutput augment_one(const ImageBuffer &image, RngStream &rng,
                          const AugmentationConfig &cfg);

struct AugmentationRecord {
  std::string output_path; // relative to the output directory
  std::string source_path; // relative to the input directory
  std::string label;
  std::string prompt;
  MaskKind mask_kind = MaskKind::LeftOn;
  std::string fractal_id;
  double lambda = kDefaultLambda;
  std::uint64_t sub_seed = 0;
  std::string backend_id;

  friend bool operator==(const AugmentationRecord &, const AugmentationRecord &) = default;
};

struct Manifest {
  std::vector<AugmentationRecord> records;
  Digest256 config_digest{};
};

struct SourceImage {
  std::string relative_path; // "<label>/<file>", generic separators
  std::string label;
};

// Class-per-subdirectory layout: every PNG/JPEG directly inside a
// first-level subdirectory is a source labelled with that directory's
// name. Sorted by relative path.
std::vector<SourceImage> scan_dataset(const std::filesystem::path &input_dir);

// "<label>/<stem>_aug<a>.png"
std::string output_relative_path(const SourceImage &source, int aug_index);

struct RunFailure {
  std::string source_path;
  int aug_index = -1; // -1: the source itself failed (e.g. decode)
  std::string kind;   // exception class, e.g. "NetworkError"
  std::string message;
};

// Class name of a library error ("DecodeError", "NetworkError", ...), or
// "Error" for anything else.
std::string error_kind(const std::exception &e);

struct RunReport {
  Manifest manifest;
  std::vector<RunFailure> failures;
  std::size_t source_images = 0;
  std::uint64_t backend_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  double seconds = 0;
};

// Materializes the augmented dataset and writes manifest.jsonl plus
// manifest.meta.json into output_dir. Individual failures are collected in
// the report, not thrown. Throws ConfigError, EmptyDataset or IoError for
// run-level problems.
RunReport run(const AugmentationConfig &cfg);

} // namespace diffusemix
