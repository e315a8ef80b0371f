#include "diffusemix/cli.hpp"

#include "diffusemix/errors.hpp"
#include "diffusemix/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

namespace diffusemix::cli {
namespace fs = std::filesystem;

double compute_overhead(double t_aug, double t_van) {
  if (!(t_van > 0.0)) {
    throw NonPositiveBaseline("baseline time must be > 0");
  }
  if (!(t_aug >= 0.0)) {
    throw std::invalid_argument("augmented time must be >= 0");
  }
  return (t_aug - t_van) / t_van * 100.0;
}

std::shared_ptr<const GeneratorBackend> make_backend(const std::string &spec,
                                                     const BackendOptions &options) {
  if (spec == "procedural") {
    const float strength = static_cast<float>(options.strength.value_or(1.0));
    if (!(strength >= 0.0f && strength <= 1.0f)) {
      throw ConfigError("--strength must be in [0,1]");
    }
    return std::make_shared<ProceduralBackend>(strength, StylizeOptions{},
                                               options.template_text);
  }
  if (spec.starts_with("remote:")) {
    RemoteOptions remote;
    remote.endpoint = spec.substr(7);
    remote.retries = options.retries;
    remote.strength = options.strength;
    remote.timeout = std::chrono::milliseconds(
        static_cast<long long>(std::llround(options.timeout_seconds * 1000)));
    return std::make_shared<RemoteBackend>(std::move(remote));
  }
  throw ConfigError("unknown backend \"" + spec +
                    "\" (expected procedural or remote:<URL>)");
}

std::shared_ptr<const FractalSource> make_fractal_source(const std::string &spec) {
  if (spec.starts_with("dir:")) {
    return std::make_shared<FractalSource>(FractalSource::from_directory(spec.substr(4)));
  }
  if (spec.starts_with("procedural:")) {
    const std::string rest = spec.substr(11);
    const auto comma = rest.find(',');
    const std::string count_text = rest.substr(0, comma);
    std::uint64_t seed = 0;
    std::size_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoul(count_text, &used);
      if (used != count_text.size()) {
        throw std::invalid_argument("trailing characters");
      }
      if (comma != std::string::npos) {
        const std::string seed_part = rest.substr(comma + 1);
        if (!seed_part.starts_with("seed=")) {
          throw std::invalid_argument("expected seed=<n>");
        }
        seed = std::stoull(seed_part.substr(5), &used);
        if (used != seed_part.size() - 5) {
          throw std::invalid_argument("trailing characters");
        }
      }
    } catch (const std::exception &) {
      throw ConfigError("malformed fractal source \"" + spec +
                        "\" (expected procedural:<count>,seed=<n>)");
    }
    if (count == 0) {
      throw ConfigError("procedural fractal count must be >= 1");
    }
    return std::make_shared<FractalSource>(FractalSource::procedural(count, seed));
  }
  throw ConfigError("unknown fractal source \"" + spec +
                    "\" (expected dir:<path> or procedural:<count>,seed=<n>)");
}

std::string format_summary(const RunReport &report, int m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "augment: %zu records written (%zu images x m=%d), %zu failures, "
                "cache %llu hits / %llu misses, %.2fs",
                report.manifest.records.size(), report.source_images, m,
                report.failures.size(),
                static_cast<unsigned long long>(report.cache_hits),
                static_cast<unsigned long long>(report.cache_misses), report.seconds);
  return buf;
}

ImageBuffer contact_sheet(const std::vector<ImageBuffer> &panels, int gutter) {
  if (panels.empty() || gutter < 0) {
    throw std::invalid_argument("contact sheet needs panels and gutter >= 0");
  }
  const int pw = panels.front().width();
  const int ph = panels.front().height();
  const int count = static_cast<int>(panels.size());
  ImageBuffer sheet(count * pw + (count - 1) * gutter, ph, 1.0f);
  for (int i = 0; i < count; ++i) {
    if (panels[i].width() != pw || panels[i].height() != ph) {
      throw DimensionMismatch("contact sheet panels must share dimensions");
    }
    const int x0 = i * (pw + gutter);
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        for (int c = 0; c < 3; ++c) {
          sheet.at(x0 + x, y, c) = panels[i].at(x, y, c);
        }
      }
    }
  }
  return sheet;
}

std::vector<std::string> config_file_args(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

namespace {

struct AugmentArgs {
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  int m = 1;
  double lambda = kDefaultLambda;
  std::string mask_set = "full";
  std::string backend = "procedural";
  std::string prompts;
  std::string fractals = "procedural:100,seed=0";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string cache_dir;
  bool lambda_sweep = false;
  std::optional<double> strength;
  int retries = 2;
  double timeout = 120;
};

struct FractalArgs {
  int count = 0;
  int size = 256;
  std::uint64_t seed = 0;
  std::string output;
};

struct PreviewArgs {
  std::string input;
  std::string prompt = "autumn";
  std::string mask = "left_on";
  std::string fractal;
  std::uint64_t fractal_seed = 0;
  double lambda = kDefaultLambda;
  std::string backend = "procedural";
  std::string prompts;
  std::optional<double> strength;
  int gutter = 4;
  std::string output;
};

struct OverheadArgs {
  double t_aug = 0;
  double t_van = 0;
};

struct ValidateArgs {
  std::string manifest;
  std::string input;
};

PromptLibrary prompts_from(const std::string &path) {
  return path.empty() ? default_library() : load_prompt_file(path);
}

std::string lambda_dir_name(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "lambda_%g", lambda);
  return buf;
}

int cmd_augment(const AugmentArgs &a, std::ostream &out, std::ostream &err) {
  AugmentationConfig cfg;
  try {
    cfg.input_dir = a.input;
    cfg.output_dir = a.output;
    cfg.seed = a.seed;
    cfg.m = a.m;
    cfg.lambda = a.lambda;
    cfg.workers = a.workers;
    const auto mask_set = parse_mask_set(a.mask_set);
    if (!mask_set) {
      throw ConfigError("--mask-set must be vertical, vertical_horizontal or full");
    }
    cfg.mask_set = *mask_set;
    cfg.prompts = prompts_from(a.prompts);
    BackendOptions bo;
    bo.strength = a.strength;
    bo.retries = a.retries;
    bo.timeout_seconds = a.timeout;
    bo.template_text = cfg.prompts.template_text();
    cfg.backend = make_backend(a.backend, bo);
    cfg.fractals = make_fractal_source(a.fractals);
    if (!a.cache_dir.empty()) {
      cfg.cache_dir = a.cache_dir;
    } else if (const char *env = std::getenv(kCacheEnvVar); env && *env) {
      cfg.cache_dir = env;
    }
    if (!fs::is_directory(cfg.input_dir)) {
      throw ConfigError("--input is not a directory: " + a.input);
    }
    cfg.validate();
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  std::vector<double> lambdas = {cfg.lambda};
  if (a.lambda_sweep) {
    lambdas.assign(std::begin(kLambdaSweep), std::end(kLambdaSweep));
  }
  int status = kSuccess;
  for (double lambda : lambdas) {
    AugmentationConfig run_cfg = cfg;
    run_cfg.lambda = lambda;
    if (a.lambda_sweep) {
      run_cfg.output_dir = cfg.output_dir / lambda_dir_name(lambda);
    }
    RunReport report;
    try {
      report = diffusemix::run(run_cfg);
    } catch (const EmptyDataset &e) {
      err << "error: " << e.what() << '\n';
      return kUsageError;
    } catch (const ConfigError &e) {
      err << "error: " << e.what() << '\n';
      return kUsageError;
    } catch (const std::exception &e) {
      err << "error: " << error_kind(e) << ": " << e.what() << '\n';
      return kRuntimeFailure;
    }
    if (a.lambda_sweep) {
      out << "lambda=" << lambda << ' ';
    }
    out << format_summary(report, run_cfg.m) << '\n';
    for (const auto &f : report.failures) {
      err << "failure: " << f.source_path;
      if (f.aug_index >= 0) {
        err << " [aug " << f.aug_index << "]";
      }
      err << ": " << f.kind << ": " << f.message << '\n';
    }
    if (!report.failures.empty()) {
      status = kRuntimeFailure;
    }
  }
  return status;
}

int cmd_fractals(const FractalArgs &a, std::ostream &out, std::ostream &err) {
  if (a.count < 1) {
    err << "error: --count must be >= 1\n";
    return kUsageError;
  }
  if (a.size < kMinFractalSize) {
    err << "error: --size must be >= " << kMinFractalSize << '\n';
    return kUsageError;
  }
  try {
    std::error_code ec;
    fs::create_directories(a.output, ec);
    if (ec) {
      throw IoError("cannot create " + a.output + ": " + ec.message());
    }
    const FractalSource source =
        FractalSource::procedural(static_cast<std::size_t>(a.count), a.seed);
    for (std::size_t i = 0; i < source.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "fractal_%04zu.png", i);
      save_image(source.resolve(source.ids()[i], a.size, a.size), fs::path(a.output) / name);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  out << "fractals: wrote " << a.count << " images to " << a.output << '\n';
  return kSuccess;
}

int cmd_preview(const PreviewArgs &a, std::ostream &out, std::ostream &err) {
  std::shared_ptr<const GeneratorBackend> backend;
  PromptLibrary prompts = default_library();
  std::optional<MaskKind> kind;
  std::string rendered;
  try {
    prompts = prompts_from(a.prompts);
    rendered = prompts.render(a.prompt);
    BackendOptions bo;
    bo.strength = a.strength;
    bo.template_text = prompts.template_text();
    backend = make_backend(a.backend, bo);
    kind = parse_mask_kind(a.mask);
    if (!kind) {
      throw ConfigError("--mask must be left_on, right_on, top_on or bottom_on");
    }
    if (!(a.lambda >= 0.0 && a.lambda <= 1.0)) {
      throw ConfigError("--lambda must be in [0,1]");
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    const ImageBuffer input = load_image(a.input);
    const int w = input.width();
    const int h = input.height();
    ImageBuffer generated = quantize(backend->generate(input, rendered));
    if (!generated.same_dims(input)) {
      generated = resize_bilinear(generated, w, h);
    }
    const Mask mask = make_mask(w, h, *kind);
    ImageBuffer mask_panel(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          mask_panel.at(x, y, c) = static_cast<float>(mask.at(x, y));
        }
      }
    }
    const ImageBuffer hybrid = concatenate(input, generated, mask);
    const ImageBuffer fractal =
        a.fractal.empty()
            ? cover_crop_resize(generate_fractal(a.fractal_seed, std::max(w, kMinFractalSize),
                                                 std::max(h, kMinFractalSize)),
                                w, h)
            : cover_crop_resize(load_image(a.fractal), w, h);
    const ImageBuffer augmented = blend(hybrid, fractal, a.lambda);
    const ImageBuffer sheet =
        contact_sheet({input, generated, mask_panel, hybrid, fractal, augmented}, a.gutter);
    save_image(sheet, a.output);
    out << "preview: panels=input,generated,mask,hybrid,fractal,augmented panel=" << w
        << "x" << h << " gutter=" << a.gutter << " sheet=" << sheet.width() << "x"
        << sheet.height() << '\n';
  } catch (const std::exception &e) {
    err << "error: " << error_kind(e) << ": " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kSuccess;
}

int cmd_overhead(const OverheadArgs &a, std::ostream &out, std::ostream &err) {
  try {
    const double value = compute_overhead(a.t_aug, a.t_van);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << "augmentation overhead: " << buf << "%\n";
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kSuccess;
}

int cmd_validate(const ValidateArgs &a, std::ostream &out, std::ostream &err) {
  std::vector<AugmentationRecord> records;
  try {
    records = read_manifest(a.manifest);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  std::optional<fs::path> input;
  if (!a.input.empty()) {
    input = a.input;
  }
  const auto issues =
      validate_records(records, fs::path(a.manifest).parent_path(), input);
  for (const auto &issue : issues) {
    err << a.manifest << ":" << issue.line << ": " << issue.message << '\n';
  }
  if (!issues.empty()) {
    out << "validate: " << issues.size() << " problem(s) in " << records.size()
        << " records\n";
    return kRuntimeFailure;
  }
  out << "validate: " << records.size() << " records ok\n";
  return kSuccess;
}

// Expands "--config <file>" / "--config=<file>" in place.
std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::vector<std::string> expanded;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      auto more = config_file_args(args[++i]);
      from_file.insert(from_file.end(), more.begin(), more.end());
    } else if (args[i].starts_with("--config=")) {
      auto more = config_file_args(args[i].substr(9));
      from_file.insert(from_file.end(), more.begin(), more.end());
    } else {
      expanded.push_back(args[i]);
    }
  }
  if (from_file.empty() || expanded.empty()) {
    return expanded;
  }
  // Subcommand first, then file values, then explicit flags: with
  // take-last semantics the flags win.
  std::vector<std::string> out{expanded.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), expanded.begin() + 1, expanded.end());
  return out;
}

} // namespace

int run(const std::vector<std::string> &raw_args, std::ostream &out, std::ostream &err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  CLI::App app{"Label-preserving diffusion/fractal image augmentation", "diffusemix"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  AugmentArgs aug;
  auto *augment = app.add_subcommand("augment", "Materialize an augmented dataset");
  augment->add_option("--input", aug.input, "Class-per-subdirectory image dataset")->required();
  augment->add_option("--output", aug.output, "Output directory")->required();
  augment->add_option("--seed", aug.seed, "Run seed")->required();
  augment->add_option("--m", aug.m, "Augmentations per image")
      ->check(CLI::PositiveNumber)->capture_default_str();
  augment->add_option("--lambda", aug.lambda, "Fractal blending factor")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  augment->add_flag("--lambda-sweep", aug.lambda_sweep,
                    "Run once per lambda in {0.1,0.2,0.3,0.4,0.5} into lambda_<v>/");
  augment->add_option("--mask-set", aug.mask_set, "vertical | vertical_horizontal | full")
      ->capture_default_str();
  augment->add_option("--backend", aug.backend, "procedural | remote:<URL>")
      ->capture_default_str();
  augment->add_option("--strength", aug.strength, "Generation strength in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  augment->add_option("--retries", aug.retries, "Remote retries on transient failures")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  augment->add_option("--timeout", aug.timeout, "Remote request timeout, seconds")
      ->check(CLI::PositiveNumber)->capture_default_str();
  augment->add_option("--prompts", aug.prompts, "Prompt file, one prompt per line");
  augment->add_option("--fractals", aug.fractals, "dir:<path> | procedural:<count>,seed=<n>")
      ->capture_default_str();
  augment->add_option("--workers", aug.workers, "Worker threads")
      ->check(CLI::PositiveNumber)->capture_default_str();
  augment->add_option("--cache-dir", aug.cache_dir,
                      std::string("Generation cache directory (default $") + kCacheEnvVar + ")");

  FractalArgs fr;
  auto *fractals = app.add_subcommand("fractals", "Render a directory of procedural fractals");
  fractals->add_option("--count", fr.count, "Number of images")->required();
  fractals->add_option("--size", fr.size, "Edge length in pixels")->capture_default_str();
  fractals->add_option("--seed", fr.seed, "Seed")->capture_default_str();
  fractals->add_option("--output", fr.output, "Output directory")->required();

  PreviewArgs pv;
  auto *preview = app.add_subcommand("preview", "Six-panel contact sheet of every stage");
  preview->add_option("--input", pv.input, "Input image")->required();
  preview->add_option("--prompt", pv.prompt, "Prompt entry")->capture_default_str();
  preview->add_option("--mask", pv.mask, "left_on | right_on | top_on | bottom_on")
      ->capture_default_str();
  preview->add_option("--fractal", pv.fractal, "Fractal image (default: procedural)");
  preview->add_option("--fractal-seed", pv.fractal_seed, "Seed of the procedural fractal")
      ->capture_default_str();
  preview->add_option("--lambda", pv.lambda, "Fractal blending factor")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  preview->add_option("--backend", pv.backend, "procedural | remote:<URL>")
      ->capture_default_str();
  preview->add_option("--prompts", pv.prompts, "Prompt file");
  preview->add_option("--strength", pv.strength, "Generation strength in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  preview->add_option("--gutter", pv.gutter, "Gutter width in pixels")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  preview->add_option("--output", pv.output, "Output PNG")->required();

  OverheadArgs ov;
  auto *overhead = app.add_subcommand("overhead", "Augmentation overhead percentage");
  overhead->add_option("--t-aug", ov.t_aug, "Generation + training time")->required();
  overhead->add_option("--t-van", ov.t_van, "Vanilla training time")->required();

  ValidateArgs va;
  auto *validate = app.add_subcommand("validate", "Check a manifest against its outputs");
  validate->add_option("--manifest", va.manifest, "manifest.jsonl")->required();
  validate->add_option("--input", va.input, "Source dataset (also check sources exist)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  if (*augment) return cmd_augment(aug, out, err);
  if (*fractals) return cmd_fractals(fr, out, err);
  if (*preview) return cmd_preview(pv, out, err);
  if (*overhead) return cmd_overhead(ov, out, err);
  if (*validate) return cmd_validate(va, out, err);
  return kUsageError;
}

} // namespace diffusemix::cli
