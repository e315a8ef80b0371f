#include "diffusemix/pipeline.hpp"

#include "diffusemix/errors.hpp"
#include "diffusemix/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <set>

#include <json.hpp>

namespace diffusemix {
namespace fs = std::filesystem;

void AugmentationConfig::validate() const {
  if (m < 1) {
    throw ConfigError("m must be >= 1");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must be in [0,1]");
  }
  if (workers < 1) {
    throw ConfigError("workers must be >= 1");
  }
  if (!backend) {
    throw ConfigError("no generator backend configured");
  }
  if (!fractals || fractals->size() == 0) {
    throw ConfigError("no fractal source configured");
  }
}

Digest256 config_digest(const AugmentationConfig &cfg) {
  nlohmann::ordered_json j;
  j["m"] = cfg.m;
  j["lambda"] = cfg.lambda;
  j["seed"] = cfg.seed;
  j["mask_set"] = std::string(to_string(cfg.mask_set));
  j["prompts"] = cfg.prompts.entries();
  j["template"] = cfg.prompts.template_text();
  j["backend_id"] = cfg.backend ? cfg.backend->backend_id() : "";
  if (cfg.fractals) {
    j["fractals"] = cfg.fractals->is_procedural()
                        ? nlohmann::ordered_json(cfg.fractals->descriptor())
                        : nlohmann::ordered_json(cfg.fractals->ids());
  }
  return sha256(j.dump());
}

class Augmenter::CountingBackend final : public GeneratorBackend {
public:
  CountingBackend(std::shared_ptr<const GeneratorBackend> inner,
                  std::atomic<std::uint64_t> &calls)
      : inner_(std::move(inner)), calls_(calls) {}

  std::string backend_id() const override { return inner_->backend_id(); }

  ImageBuffer generate(const ImageBuffer &image,
                       const std::string &rendered_prompt) const override {
    calls_.fetch_add(1);
    return inner_->generate(image, rendered_prompt);
  }

private:
  std::shared_ptr<const GeneratorBackend> inner_;
  std::atomic<std::uint64_t> &calls_;
};

Augmenter::Augmenter(const AugmentationConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  counting_ = std::make_shared<CountingBackend>(cfg_.backend, backend_calls_);
  if (cfg_.cache_dir) {
    cache_ = std::make_unique<GenerationCache>(*cfg_.cache_dir);
  }
}

ImageBuffer Augmenter::generate(const ImageBuffer &image,
                                const std::string &prompt) const {
  const std::string rendered = cfg_.prompts.render(prompt);
  ImageBuffer generated = cache_ ? cache_->generate(*counting_, image, rendered)
                                 : quantize(counting_->generate(image, rendered));
  if (!generated.same_dims(image)) {
    generated = resize_bilinear(generated, image.width(), image.height());
  }
  return generated;
}

AugmentOutput Augmenter::augment_one(const ImageBuffer &image, RngStream &rng,
                                     const AugmentHooks &hooks) const {
  AugmentOutput out;
  out.draws.prompt = sample_prompt(cfg_.prompts, rng);
  out.stages.generated = generate(image, out.draws.prompt);

  out.draws.mask_kind = sample_mask_kind(cfg_.mask_set, rng);
  out.stages.mask = hooks.force_mask
                        ? *hooks.force_mask
                        : make_mask(image.width(), image.height(), out.draws.mask_kind);
  out.stages.hybrid = concatenate(image, out.stages.generated, out.stages.mask);

  out.draws.fractal_id = sample_fractal(*cfg_.fractals, rng);
  out.stages.fractal =
      cfg_.fractals->fitted(out.draws.fractal_id, image.width(), image.height());
  out.image = blend(out.stages.hybrid, *out.stages.fractal, cfg_.lambda);
  return out;
}

AugmentOutput augment_one(const ImageBuffer &image, RngStream &rng,
                          const AugmentationConfig &cfg) {
  return Augmenter(cfg).augment_one(image, rng);
}

std::string error_kind(const std::exception &e) {
#define DIFFUSEMIX_KIND(Name)                                                  \
  if (dynamic_cast<const Name *>(&e) != nullptr) return #Name
  DIFFUSEMIX_KIND(FileNotFound);
  DIFFUSEMIX_KIND(DecodeError);
  DIFFUSEMIX_KIND(IoError);
  DIFFUSEMIX_KIND(UnknownPrompt);
  DIFFUSEMIX_KIND(DimensionMismatch);
  DIFFUSEMIX_KIND(LambdaOutOfRange);
  DIFFUSEMIX_KIND(EmptyFractalSet);
  DIFFUSEMIX_KIND(EmptyDataset);
  DIFFUSEMIX_KIND(ConfigError);
  DIFFUSEMIX_KIND(NetworkError);
  DIFFUSEMIX_KIND(ProtocolError);
  DIFFUSEMIX_KIND(RemoteError);
#undef DIFFUSEMIX_KIND
  return "Error";
}

namespace {

bool has_image_extension(const fs::path &p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

} // namespace

std::vector<SourceImage> scan_dataset(const fs::path &input_dir) {
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) {
    throw FileNotFound("input directory not found: " + input_dir.string());
  }
  std::vector<SourceImage> sources;
  for (const auto &cls : fs::directory_iterator(input_dir)) {
    if (!cls.is_directory()) {
      continue;
    }
    const std::string label = cls.path().filename().string();
    if (label.starts_with('.')) {
      continue;
    }
    for (const auto &entry : fs::directory_iterator(cls.path())) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        sources.push_back(
            {label + "/" + entry.path().filename().string(), label});
      }
    }
  }
  std::sort(sources.begin(), sources.end(),
            [](const SourceImage &a, const SourceImage &b) {
              return a.relative_path < b.relative_path;
            });
  return sources;
}

std::string output_relative_path(const SourceImage &source, int aug_index) {
  const fs::path rel(source.relative_path);
  return source.label + "/" + rel.stem().string() + "_aug" +
         std::to_string(aug_index) + ".png";
}

RunReport run(const AugmentationConfig &cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const std::vector<SourceImage> sources = scan_dataset(cfg.input_dir);
  if (sources.empty()) {
    throw EmptyDataset("no images found under " + cfg.input_dir.string() +
                       " (expected <class>/<image> layout)");
  }

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  std::set<std::string> labels;
  for (const auto &s : sources) {
    labels.insert(s.label);
  }
  for (const auto &label : labels) {
    fs::create_directories(cfg.output_dir / label, ec);
    if (ec) {
      throw IoError("cannot create output directory " +
                    (cfg.output_dir / label).string() + ": " + ec.message());
    }
  }

  // Two sources with the same stem in one class (a.png, a.jpg) would share
  // output names; the later one is reported instead of overwriting.
  std::vector<bool> collides(sources.size(), false);
  {
    std::map<std::string, std::size_t> first_owner;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (!first_owner.try_emplace(output_relative_path(sources[i], 0), i).second) {
        collides[i] = true;
      }
    }
  }

  const Augmenter augmenter(cfg);
  const std::string backend_id = cfg.backend->backend_id();
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  const auto n = static_cast<std::ptrdiff_t>(sources.size());

  std::vector<std::optional<AugmentationRecord>> slots(sources.size() * m);
  std::vector<std::optional<RunFailure>> source_failures(sources.size());
  std::vector<std::optional<RunFailure>> slot_failures(sources.size() * m);

  // Parallel over source images; each image's m augmentations share one
  // decode. Every slot is written by exactly one iteration.
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const SourceImage &src = sources[static_cast<std::size_t>(i)];
    if (collides[static_cast<std::size_t>(i)]) {
      source_failures[i] = RunFailure{
          src.relative_path, -1, "ConfigError",
          "output name collides with another source of the same stem"};
      continue;
    }
    ImageBuffer image;
    try {
      image = load_image(cfg.input_dir / fs::path(src.relative_path));
    } catch (const std::exception &e) {
      source_failures[i] = RunFailure{src.relative_path, -1, error_kind(e), e.what()};
      continue;
    }
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t slot = static_cast<std::size_t>(i) * m + a;
      try {
        RngStream rng = derive_substream(cfg.seed, static_cast<std::uint64_t>(i), a);
        const std::uint64_t sub_seed = rng.initial_state();
        AugmentOutput result = augmenter.augment_one(image, rng);
        const std::string out_rel = output_relative_path(src, static_cast<int>(a));
        save_image(result.image, cfg.output_dir / fs::path(out_rel));
        slots[slot] = AugmentationRecord{out_rel,
                                         src.relative_path,
                                         src.label,
                                         std::move(result.draws.prompt),
                                         result.draws.mask_kind,
                                         std::move(result.draws.fractal_id),
                                         cfg.lambda,
                                         sub_seed,
                                         backend_id};
      } catch (const std::exception &e) {
        slot_failures[slot] =
            RunFailure{src.relative_path, static_cast<int>(a), error_kind(e),
                       e.what()};
      }
    }
  }

  RunReport report;
  report.source_images = sources.size();
  report.manifest.config_digest = config_digest(cfg);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (source_failures[i]) {
      report.failures.push_back(std::move(*source_failures[i]));
    }
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t slot = i * m + a;
      if (slots[slot]) {
        report.manifest.records.push_back(std::move(*slots[slot]));
      } else if (slot_failures[slot]) {
        report.failures.push_back(std::move(*slot_failures[slot]));
      }
    }
  }
  write_manifest(report.manifest, cfg.output_dir);

  report.backend_calls = augmenter.backend_calls();
  report.cache_hits = augmenter.cache_hits();
  report.cache_misses = augmenter.cache_misses();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

} // namespace diffusemix
