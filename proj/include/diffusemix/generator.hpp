#pragma once

#include "diffusemix/digest.hpp"
#include "diffusemix/image.hpp"
#include "diffusemix/prompts.hpp"
#include "diffusemix/stylize.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace diffusemix {

// The generation step: (source image, rendered prompt) -> generated image.
// Implementations must be callable concurrently. Output dimensions may
// differ from the input; the pipeline reconciles them.
class GeneratorBackend {
public:
  virtual ~GeneratorBackend() = default;

  // Stable identifier of the generation semantics. Participates in cache
  // keys, so anything that changes output must change the id.
  virtual std::string backend_id() const = 0;

  virtual ImageBuffer generate(const ImageBuffer &image,
                               const std::string &rendered_prompt) const = 0;
};

// Offline backend built on procedural_stylize. The rendered prompt is
// mapped back to its library entry through the template; output is snapped
// to 8-bit levels like any PNG-producing model.
class ProceduralBackend final : public GeneratorBackend {
public:
  explicit ProceduralBackend(
      float strength = 1.0f, StylizeOptions options = {},
      std::string template_text = std::string(PromptLibrary::kDefaultTemplate));

  std::string backend_id() const override;
  ImageBuffer generate(const ImageBuffer &image,
                       const std::string &rendered_prompt) const override;

private:
  float strength_;
  StylizeOptions options_;
  std::string template_;
};

struct RemoteOptions {
  // Base URL, e.g. "http://127.0.0.1:7860" or "http://host/api/v1". The
  // request goes to {endpoint}/generate.
  std::string endpoint;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  // Additional attempts after the first one on transient failures
  // (connection errors, HTTP 408/429/5xx).
  int retries = 2;
  std::chrono::milliseconds backoff{200};
  std::optional<double> strength;
};

// POST {"image": <base64 PNG>, "prompt": ..., ["strength": ...]} and decode
// {"image": <base64 PNG>}. NetworkError after retries are exhausted,
// RemoteError for a service-reported failure, ProtocolError for a malformed
// response.
ImageBuffer remote_generate(const ImageBuffer &image,
                            const std::string &rendered_prompt,
                            const RemoteOptions &options);

class RemoteBackend final : public GeneratorBackend {
public:
  explicit RemoteBackend(RemoteOptions options);

  std::string backend_id() const override;
  ImageBuffer generate(const ImageBuffer &image,
                       const std::string &rendered_prompt) const override;

  const RemoteOptions &options() const { return options_; }

private:
  RemoteOptions options_;
};

// Content-addressed store of generated images:
//   {dir}/{hex[0:2]}/{hex}.png
// where hex is the SHA-256 over the length-prefixed fields backend_id,
// rendered prompt, and the source image bytes (u32 LE width, u32 LE height,
// then the float samples in little-endian IEEE-754 order).
class GenerationCache {
public:
  explicit GenerationCache(std::filesystem::path dir);

  static Digest256 key(std::string_view backend_id,
                       std::string_view rendered_prompt,
                       const ImageBuffer &image);

  std::filesystem::path entry_path(const Digest256 &key) const;
  const std::filesystem::path &dir() const { return dir_; }

  // Returns the stored image on a hit. On a miss calls the backend, stores
  // its 8-bit-quantized output and returns that, so hit and miss results
  // are identical. Concurrent misses on one key run the backend once.
  ImageBuffer generate(const GeneratorBackend &backend, const ImageBuffer &image,
                       const std::string &rendered_prompt);

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

private:
  std::optional<ImageBuffer> try_load(const std::filesystem::path &path) const;

  static constexpr std::size_t kStripes = 64;

  std::filesystem::path dir_;
  std::array<std::mutex, kStripes> stripes_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

inline ImageBuffer cached_generate(const GeneratorBackend &backend,
                                   GenerationCache &cache,
                                   const ImageBuffer &image,
                                   const std::string &rendered_prompt) {
  return cache.generate(backend, image, rendered_prompt);
}

} // namespace diffusemix
