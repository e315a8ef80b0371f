#include "diffusemix/fractal.hpp"

#include "diffusemix/errors.hpp"
#include "diffusemix/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace diffusemix {
namespace fs = std::filesystem;

namespace {

struct Affine {
  double a, b, c, d, e, f;
};

using Rgb = std::array<double, 3>;

Rgb hsv_to_rgb(double h, double s, double v) {
  const double hh = std::fmod(h, 1.0) * 6.0;
  const int sector = static_cast<int>(hh);
  const double frac = hh - sector;
  const double p = v * (1 - s);
  const double q = v * (1 - s * frac);
  const double t = v * (1 - s * (1 - frac));
  switch (sector) {
  case 0: return {v, t, p};
  case 1: return {q, v, p};
  case 2: return {p, v, t};
  case 3: return {p, q, v};
  case 4: return {t, p, v};
  default: return {v, p, q};
  }
}

Rgb gradient(const std::array<Rgb, 3> &palette, double t) {
  t = std::clamp(t, 0.0, 1.0);
  const Rgb &lo = t < 0.5 ? palette[0] : palette[1];
  const Rgb &hi = t < 0.5 ? palette[1] : palette[2];
  const double u = t < 0.5 ? t * 2 : (t - 0.5) * 2;
  return {lo[0] + u * (hi[0] - lo[0]), lo[1] + u * (hi[1] - lo[1]),
          lo[2] + u * (hi[2] - lo[2])};
}

} // namespace

ImageBuffer generate_fractal(std::uint64_t seed, int width, int height) {
  if (width < kMinFractalSize || height < kMinFractalSize) {
    throw std::invalid_argument("fractal size must be at least 16x16");
  }
  RngStream rng(mix64(seed ^ 0xF3AC7A1F3AC7A1F3ull));
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
  };

  const std::size_t map_count = 3 + rng.uniform_index(4);
  std::vector<Affine> maps(map_count);
  std::vector<double> cumulative(map_count);
  double total = 0;
  for (std::size_t i = 0; i < map_count; ++i) {
    const double theta = uniform(0, 2 * std::numbers::pi);
    const double sx = uniform(0.35, 0.75);
    const double sy = uniform(0.35, 0.75);
    const double shear = uniform(-0.3, 0.3);
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    // R(theta) * [[sx, shear], [0, sy]]
    maps[i] = {cs * sx, cs * shear - sn * sy, sn * sx, sn * shear + cs * sy,
               uniform(-1, 1), uniform(-1, 1)};
    total += std::abs(maps[i].a * maps[i].d - maps[i].b * maps[i].c) + 0.05;
    cumulative[i] = total;
  }

  std::array<Rgb, 3> palette;
  const double base_hue = rng.uniform01();
  for (int i = 0; i < 3; ++i) {
    palette[i] = hsv_to_rgb(base_hue + i * uniform(0.15, 0.4), uniform(0.5, 1.0),
                            uniform(0.7, 1.0));
  }
  const Rgb background = {palette[0][0] * 0.15, palette[0][1] * 0.15,
                          palette[0][2] * 0.15};

  double x = 0;
  double y = 0;
  double hue = 0;
  const auto step = [&] {
    const double r = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                              map_count - 1);
    const Affine &m = maps[k];
    const double nx = m.a * x + m.b * y + m.e;
    const double ny = m.c * x + m.d * y + m.f;
    x = nx;
    y = ny;
    hue = 0.5 * (hue + static_cast<double>(k) / static_cast<double>(map_count - 1));
  };

  for (int i = 0; i < 64; ++i) step();
  double min_x = x, max_x = x, min_y = y, max_y = y;
  for (int i = 0; i < 4096; ++i) {
    step();
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double margin = 0.04;

  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  std::vector<std::uint32_t> density(pixels, 0);
  std::vector<double> colour(pixels, 0.0);
  const std::size_t iterations = pixels * 6;
  for (std::size_t i = 0; i < iterations; ++i) {
    step();
    const double u = margin + (1 - 2 * margin) * (x - min_x) / span_x;
    const double v = margin + (1 - 2 * margin) * (y - min_y) / span_y;
    const int px = static_cast<int>(std::floor(u * width));
    const int py = static_cast<int>(std::floor(v * height));
    if (px < 0 || py < 0 || px >= width || py >= height) {
      continue;
    }
    const std::size_t p = static_cast<std::size_t>(py) * width + px;
    ++density[p];
    colour[p] += hue;
  }

  const std::uint32_t peak = *std::max_element(density.begin(), density.end());
  const double norm = std::log1p(static_cast<double>(std::max<std::uint32_t>(peak, 1)));
  ImageBuffer out(width, height);
  auto dst = out.mutable_data();
  for (std::size_t p = 0; p < pixels; ++p) {
    const double level = std::log1p(static_cast<double>(density[p])) / norm;
    const Rgb c = density[p] ? gradient(palette, colour[p] / density[p]) : background;
    for (int k = 0; k < 3; ++k) {
      const double v = level * c[k] + (1 - level) * background[k];
      dst[p * 3 + k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

FractalSource FractalSource::from_directory(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw FileNotFound("fractal directory not found: " + dir.string());
  }
  std::vector<std::string> names;
  for (const auto &entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && !name.starts_with('.')) {
      names.push_back(name);
    }
  }
  if (names.empty()) {
    throw EmptyFractalSet("no fractal images in " + dir.string());
  }
  std::sort(names.begin(), names.end());

  FractalSource src;
  src.dir_ = dir;
  for (const auto &name : names) {
    try {
      (void)load_image(dir / name);
      src.ids_.push_back(name);
    } catch (const Error &e) {
      std::cerr << "warning: skipping fractal " << name << ": " << e.what() << '\n';
      src.skipped_.push_back(name);
    }
  }
  if (src.ids_.empty()) {
    throw DecodeError("none of the " + std::to_string(names.size()) +
                      " files in " + dir.string() + " decode as images");
  }
  return src;
}

FractalSource FractalSource::procedural(std::size_t count, std::uint64_t seed) {
  if (count == 0) {
    throw EmptyFractalSet("procedural fractal count must be >= 1");
  }
  FractalSource src;
  src.procedural_ = true;
  src.seed_ = seed;
  src.ids_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "procedural-%04zu", i);
    src.ids_.emplace_back(buf);
  }
  return src;
}

std::string FractalSource::descriptor() const {
  if (procedural_) {
    return "procedural:" + std::to_string(ids_.size()) + ",seed=" + std::to_string(seed_);
  }
  return "dir:" + dir_.string();
}

std::uint64_t FractalSource::item_seed(std::size_t index) const {
  return mix64(mix64(seed_ + RngStream::kGamma) ^ mix64(index + 0xA24BAED4963EE407ull));
}

std::size_t FractalSource::index_of(const std::string &id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) {
    throw std::invalid_argument("unknown fractal id: " + id);
  }
  return static_cast<std::size_t>(it - ids_.begin());
}

ImageBuffer FractalSource::resolve(const std::string &id, int width, int height) const {
  const std::size_t index = index_of(id);
  if (procedural_) {
    return generate_fractal(item_seed(index), std::max(width, kMinFractalSize),
                            std::max(height, kMinFractalSize));
  }
  return load_image(dir_ / id);
}

std::shared_ptr<const ImageBuffer> FractalSource::fitted(const std::string &id,
                                                        int width, int height) const {
  const auto key = std::make_tuple(id, width, height);
  {
    std::shared_lock lock(memo_->mutex);
    if (const auto it = memo_->items.find(key); it != memo_->items.end()) {
      return it->second;
    }
  }
  auto image = std::make_shared<const ImageBuffer>(
      cover_crop_resize(resolve(id, width, height), width, height));
  std::unique_lock lock(memo_->mutex);
  if (memo_->items.size() >= kMemoCapacity) {
    memo_->items.clear();
  }
  // A concurrent caller may have inserted the same (identical) image.
  return memo_->items.try_emplace(key, std::move(image)).first->second;
}

FractalSource load_fractal_dir(const fs::path &dir) {
  return FractalSource::from_directory(dir);
}

ImageBuffer blend(const ImageBuffer &hybrid, const ImageBuffer &fractal, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw LambdaOutOfRange("blend factor must be in [0,1], got " + std::to_string(lambda));
  }
  if (!hybrid.same_dims(fractal)) {
    throw DimensionMismatch("blend: hybrid " + std::to_string(hybrid.width()) + "x" +
                            std::to_string(hybrid.height()) + " vs fractal " +
                            std::to_string(fractal.width()) + "x" +
                            std::to_string(fractal.height()));
  }
  ImageBuffer out(hybrid.width(), hybrid.height());
  kernels::lerp_blend(hybrid.data(), fractal.data(), lambda, out.mutable_data());
  return out;
}

const std::string &sample_fractal(const FractalSource &source, RngStream &rng) {
  return source.ids()[rng.uniform_index(source.size())];
}

} // namespace diffusemix
