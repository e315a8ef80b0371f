#include "diffusemix/errors.hpp"
#include "diffusemix/fractal.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

using namespace diffusemix;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

double variance(const ImageBuffer &img) {
  double sum = 0, sq = 0;
  for (float v : img.data()) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(img.size());
  return sq / n - (sum / n) * (sum / n);
}

double max_channel_span(const ImageBuffer &img) {
  double best = 0;
  for (int c = 0; c < 3; ++c) {
    float lo = 1, hi = 0;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
      lo = std::min(lo, img.data()[p * 3 + c]);
      hi = std::max(hi, img.data()[p * 3 + c]);
    }
    best = std::max(best, static_cast<double>(hi - lo));
  }
  return best;
}

} // namespace

TEST_CASE("generate_fractal is deterministic") {
  CHECK(generate_fractal(5, 64, 48) == generate_fractal(5, 64, 48));
}

TEST_CASE("different seeds give visibly different fractals") {
  const ImageBuffer a = generate_fractal(1, 64, 64);
  const ImageBuffer b = generate_fractal(2, 64, 64);
  std::size_t differing = 0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      if (a.data()[p * 3 + c] != b.data()[p * 3 + c]) {
        ++differing;
        break;
      }
    }
  }
  CHECK(differing * 100 >= a.pixel_count());
}

TEST_CASE("fractals are non-constant and use the value range") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CAPTURE(seed);
    const ImageBuffer img = generate_fractal(seed, 64, 64);
    CHECK(variance(img) > 0.0);
    CHECK(max_channel_span(img) >= 0.2);
    for (float v : img.data()) REQUIRE((v >= 0.0f && v <= 1.0f));
  }
  CHECK_THROWS_AS(generate_fractal(1, 15, 64), std::invalid_argument);
}

TEST_CASE("directory source sorts ids and skips undecodable files") {
  TempDir dir;
  save_image(ImageBuffer(4, 4, 0.2f), dir / "b.png");
  save_image(ImageBuffer(4, 4, 0.8f), dir / "a.png");
  {
    std::ofstream(dir / "c.png") << "garbage";
  }
  const FractalSource src = load_fractal_dir(dir.path());
  CHECK(src.ids() == std::vector<std::string>{"a.png", "b.png"});
  CHECK(src.skipped() == std::vector<std::string>{"c.png"});
  CHECK(src.descriptor() == "dir:" + dir.path().string());
  CHECK(src.resolve("a.png").at(0, 0, 0) == quantize_level(0.8f) / 255.0f);
}

TEST_CASE("directory source errors") {
  TempDir dir;
  CHECK_THROWS_AS(load_fractal_dir(dir.path()), EmptyFractalSet);
  {
    std::ofstream(dir / "x.png") << "garbage";
  }
  CHECK_THROWS_AS(load_fractal_dir(dir.path()), DecodeError);
  CHECK_THROWS_AS(load_fractal_dir(dir / "missing"), FileNotFound);
}

TEST_CASE("directory with 100 images has 100 items") {
  TempDir dir;
  for (int i = 0; i < 100; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "f%03d.png", i);
    save_image(ImageBuffer(2, 2, static_cast<float>(i) / 100.0f), dir / name);
  }
  CHECK(load_fractal_dir(dir.path()).size() == 100);
}

TEST_CASE("procedural source ids, resolution and fitting") {
  const FractalSource src = FractalSource::procedural(3, 9);
  CHECK(src.ids() == std::vector<std::string>{"procedural-0000", "procedural-0001",
                                              "procedural-0002"});
  CHECK(src.descriptor() == "procedural:3,seed=9");
  CHECK(src.resolve("procedural-0001", 32, 32) == src.resolve("procedural-0001", 32, 32));
  CHECK(src.resolve("procedural-0001", 32, 32) != src.resolve("procedural-0002", 32, 32));
  const auto fitted = src.fitted("procedural-0000", 8, 8);
  CHECK(fitted->width() == 8);
  CHECK(fitted->height() == 8);
  CHECK(src.fitted("procedural-0000", 8, 8).get() == fitted.get());
  CHECK(*fitted == cover_crop_resize(src.resolve("procedural-0000", 16, 16), 8, 8));
  CHECK_THROWS_AS(FractalSource::procedural(0, 1), EmptyFractalSet);
  CHECK_THROWS_AS(src.resolve("nope"), std::invalid_argument);
}

TEST_CASE("blend endpoints and worked value") {
  const ImageBuffer h = testsupport::random_image(7, 5, 1);
  const ImageBuffer f = testsupport::random_image(7, 5, 2);
  CHECK(blend(h, f, 0.0) == h);
  CHECK(blend(h, f, 1.0) == f);
  // 0.2 * 1.0 + 0.8 * 0.5 = 0.6
  const ImageBuffer out = blend(ImageBuffer(1, 1, 0.5f), ImageBuffer(1, 1, 1.0f), 0.2);
  for (float v : out.data()) CHECK(v == doctest::Approx(0.6).epsilon(1e-7));
}

TEST_CASE("blend is affine in lambda") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ImageBuffer h = testsupport::random_image(6, 6, seed);
    const ImageBuffer f = testsupport::random_image(6, 6, seed + 50);
    for (double l1 : {0.05, 0.1, 0.2, 0.25, 0.5}) {
      const ImageBuffer b1 = blend(h, f, l1);
      const ImageBuffer b2 = blend(h, f, 2 * l1);
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double step2 = static_cast<double>(b2.data()[i]) - b1.data()[i];
        const double step1 = static_cast<double>(b1.data()[i]) - h.data()[i];
        CHECK(std::abs(step2 - step1) <= 1e-6);
      }
    }
  }
}

TEST_CASE("blend range preservation and commuted form") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ImageBuffer h = testsupport::random_image(8, 8, seed);
    const ImageBuffer f = testsupport::random_image(8, 8, seed + 77);
    for (double lambda : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0}) {
      const ImageBuffer out = blend(h, f, lambda);
      for (float v : out.data()) REQUIRE((v >= 0.0f && v <= 1.0f));
      CHECK(out == blend(f, h, 1.0 - lambda));
    }
  }
}

TEST_CASE("blend errors") {
  CHECK_THROWS_AS(blend(ImageBuffer(2, 2), ImageBuffer(2, 2), 1.5), LambdaOutOfRange);
  CHECK_THROWS_AS(blend(ImageBuffer(2, 2), ImageBuffer(2, 2), -0.1), LambdaOutOfRange);
  CHECK_THROWS_AS(blend(ImageBuffer(2, 2), ImageBuffer(3, 2), 0.2), DimensionMismatch);
}

TEST_CASE("sample_fractal draws uniformly from the source") {
  const FractalSource single = FractalSource::procedural(1, 0);
  RngStream rng(17);
  for (int i = 0; i < 100; ++i) CHECK(sample_fractal(single, rng) == "procedural-0000");

  const FractalSource hundred = FractalSource::procedural(100, 0);
  std::map<std::string, int> counts;
  constexpr int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_fractal(hundred, rng)];
  CHECK(counts.size() == 100);
  for (const auto &[id, n] : counts) {
    CHECK(std::find(hundred.ids().begin(), hundred.ids().end(), id) != hundred.ids().end());
    CHECK(std::abs(static_cast<double>(n) / draws - 0.01) <= 0.003);
  }
}
