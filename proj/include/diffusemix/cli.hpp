#pragma once

#include "diffusemix/fractal.hpp"
#include "diffusemix/generator.hpp"
#include "diffusemix/pipeline.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace diffusemix::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

inline constexpr const char *kCacheEnvVar = "DIFFUSEMIX_CACHE";
inline constexpr double kLambdaSweep[] = {0.1, 0.2, 0.3, 0.4, 0.5};

// (t_aug - t_van) / t_van * 100. NonPositiveBaseline unless t_van > 0;
// std::invalid_argument when t_aug < 0.
double compute_overhead(double t_aug, double t_van);

struct BackendOptions {
  std::optional<double> strength;
  int retries = 2;
  double timeout_seconds = 120;
  std::string template_text = std::string(PromptLibrary::kDefaultTemplate);
};

// "procedural" | "remote:<URL>". ConfigError otherwise.
std::shared_ptr<const GeneratorBackend> make_backend(const std::string &spec,
                                                     const BackendOptions &options = {});

// "dir:<path>" | "procedural:<count>[,seed=<n>]". ConfigError otherwise.
std::shared_ptr<const FractalSource> make_fractal_source(const std::string &spec);

// "augment: <n> records written (<k> images x m=<m>), <f> failures, cache
// <h> hits / <x> misses, <t>s"
std::string format_summary(const RunReport &report, int m);

struct PreviewLayout {
  int panel_width = 0;
  int panel_height = 0;
  int gutter = 0;
  int width() const { return 6 * panel_width + 5 * gutter; }
  int height() const { return panel_height; }
};

// Six panels left to right: input, generated, mask, hybrid, fractal,
// augmented, separated by white gutters.
ImageBuffer contact_sheet(const std::vector<ImageBuffer> &panels, int gutter);

// Parses a key=value file into "--key value" arguments. Blank lines and
// '#' comments are skipped; "key=true" becomes a bare "--key" flag.
std::vector<std::string> config_file_args(const std::string &path);

// Full command-line entry point. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace diffusemix::cli
