#include "diffusemix/errors.hpp"
#include "diffusemix/image.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstdio>
#include <vector>

#include <jpeglib.h>
#include <png.h>

using namespace diffusemix;
using testsupport::TempDir;

namespace {

// Writes a PNG straight through libpng, bypassing encode_png.
void write_raw_png(const std::filesystem::path &path, int w, int h,
                   png_uint_32 format, const std::vector<std::uint8_t> &samples) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, samples.data(), 0, nullptr));
}

std::vector<std::uint8_t> read_raw_png_rgb(const std::filesystem::path &path, int &w, int &h) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_file(&image, path.c_str()));
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> out(PNG_IMAGE_SIZE(image));
  REQUIRE(png_image_finish_read(&image, nullptr, out.data(), 0, nullptr));
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  return out;
}

void write_raw_jpeg(const std::filesystem::path &path, int w, int h, std::uint8_t r,
                    std::uint8_t g, std::uint8_t b) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  FILE *f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 100, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (int x = 0; x < w; ++x) {
    row[x * 3] = r;
    row[x * 3 + 1] = g;
    row[x * 3 + 2] = b;
  }
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW p = row.data();
    jpeg_write_scanlines(&cinfo, &p, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

} // namespace

TEST_CASE("load_image maps 8-bit samples to v/255") {
  TempDir dir;
  write_raw_png(dir / "px.png", 1, 1, PNG_FORMAT_RGB, {255, 0, 128});
  const ImageBuffer img = load_image(dir / "px.png");
  REQUIRE(img.width() == 1);
  REQUIRE(img.height() == 1);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(0, 0, 1) == 0.0f);
  CHECK(img.at(0, 0, 2) == 128.0f / 255.0f);
}

TEST_CASE("load_image of an all-black PNG is all zeros") {
  TempDir dir;
  write_raw_png(dir / "black.png", 2, 2, PNG_FORMAT_RGB, std::vector<std::uint8_t>(12, 0));
  const ImageBuffer img = load_image(dir / "black.png");
  CHECK(img.size() == 12);
  for (float v : img.data()) CHECK(v == 0.0f);
}

TEST_CASE("grayscale PNG expands to three equal channels") {
  TempDir dir;
  write_raw_png(dir / "gray.png", 3, 3, PNG_FORMAT_GRAY, std::vector<std::uint8_t>(9, 51));
  const ImageBuffer img = load_image(dir / "gray.png");
  REQUIRE(img.size() == 27);
  for (float v : img.data()) {
    // 51/255 = 0.2 exactly in the reals.
    CHECK(v == doctest::Approx(0.2).epsilon(1e-7));
  }
}

TEST_CASE("alpha is dropped, not composited") {
  TempDir dir;
  write_raw_png(dir / "rgba.png", 1, 1, PNG_FORMAT_RGBA, {10, 200, 30, 0});
  const ImageBuffer img = load_image(dir / "rgba.png");
  CHECK(quantize_level(img.at(0, 0, 0)) == 10);
  CHECK(quantize_level(img.at(0, 0, 1)) == 200);
  CHECK(quantize_level(img.at(0, 0, 2)) == 30);
}

TEST_CASE("JPEG input decodes to RGB") {
  TempDir dir;
  write_raw_jpeg(dir / "c.jpg", 8, 8, 200, 100, 50);
  const ImageBuffer img = load_image(dir / "c.jpg");
  CHECK(img.width() == 8);
  CHECK(img.height() == 8);
  CHECK(std::abs(quantize_level(img.at(3, 3, 0)) - 200) <= 3);
  CHECK(std::abs(quantize_level(img.at(3, 3, 1)) - 100) <= 3);
  CHECK(std::abs(quantize_level(img.at(3, 3, 2)) - 50) <= 3);
}

TEST_CASE("load_image errors") {
  TempDir dir;
  CHECK_THROWS_AS(load_image(dir / "missing.png"), FileNotFound);
  const std::vector<std::uint8_t> junk = {'n', 'o', 't', ' ', 'a', 'n', ' ', 'i', 'm', 'g'};
  write_file_bytes(dir / "junk.png", junk);
  CHECK_THROWS_AS(load_image(dir / "junk.png"), DecodeError);
  // Valid signature, truncated body.
  auto png = encode_png(ImageBuffer(4, 4, 0.5f));
  png.resize(png.size() / 2);
  write_file_bytes(dir / "truncated.png", png);
  CHECK_THROWS_AS(load_image(dir / "truncated.png"), DecodeError);
}

TEST_CASE("save_image quantizes with round-half-to-even") {
  // 0.5 * 255 = 127.5 exactly; the even neighbour is 128.
  CHECK(quantize_level(0.5f) == 128);
  CHECK(quantize_level(1.0f) == 255);
  CHECK(quantize_level(0.0f) == 0);
  CHECK(quantize_level(-0.2f) == 0);
  CHECK(quantize_level(1.7f) == 255);

  TempDir dir;
  save_image(ImageBuffer(1, 1, 1.0f), dir / "white.png");
  save_image(ImageBuffer(1, 1, 0.5f), dir / "half.png");
  int w = 0, h = 0;
  CHECK(read_raw_png_rgb(dir / "white.png", w, h) == std::vector<std::uint8_t>{255, 255, 255});
  CHECK(read_raw_png_rgb(dir / "half.png", w, h) == std::vector<std::uint8_t>{128, 128, 128});
}

TEST_CASE("save/load round trip stays within one quantization step") {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ImageBuffer img = testsupport::random_image(8, 8, seed);
    save_image(img, dir / "rt.png");
    const ImageBuffer back = load_image(dir / "rt.png");
    REQUIRE(back.same_dims(img));
    for (std::size_t i = 0; i < img.size(); ++i) {
      CHECK(std::abs(back.data()[i] - img.data()[i]) <= 1.0f / 255.0f);
    }
    CHECK(back == quantize(img));
  }
}

TEST_CASE("quantize is idempotent") {
  const ImageBuffer img = testsupport::random_image(16, 16, 3);
  const ImageBuffer once = quantize(img);
  CHECK(quantize(once) == once);
}

TEST_CASE("encode_png is byte-deterministic") {
  const ImageBuffer img = testsupport::random_image(13, 7, 11);
  CHECK(encode_png(img) == encode_png(img));
}

TEST_CASE("resize_bilinear same size is an exact copy") {
  const ImageBuffer img = testsupport::random_image(4, 4, 1);
  CHECK(resize_bilinear(img, 4, 4) == img);
}

TEST_CASE("resize_bilinear keeps constant images constant") {
  const ImageBuffer img(2, 2, 0.3f);
  for (auto [w, h] : {std::pair{1, 1}, {3, 5}, {7, 2}, {16, 16}}) {
    const ImageBuffer out = resize_bilinear(img, w, h);
    CHECK(out.width() == w);
    CHECK(out.height() == h);
    for (float v : out.data()) CHECK(v == 0.3f);
  }
}

TEST_CASE("resize_bilinear uses pixel-center alignment") {
  // Source x for destination x: (x + 0.5) * 2/4 - 0.5 = {-0.25, 0.25, 0.75,
  // 1.25}, clamped to [0,1] -> weights give 0, 0.25, 0.75, 1.
  const ImageBuffer src(2, 1, std::vector<float>{0, 0, 0, 1, 1, 1});
  const ImageBuffer out = resize_bilinear(src, 4, 1);
  const float expected[] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int x = 0; x < 4; ++x) {
    for (int c = 0; c < 3; ++c) CHECK(out.at(x, 0, c) == expected[x]);
  }
  CHECK_THROWS_AS(resize_bilinear(src, 0, 1), std::invalid_argument);
}

TEST_CASE("resize_bilinear preserves the value range") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageBuffer img = testsupport::random_image(5 + seed, 3 + seed, seed);
    const ImageBuffer out = resize_bilinear(img, 17, 9);
    for (float v : out.data()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("cover_crop_resize geometry") {
  SUBCASE("same size is identity") {
    const ImageBuffer img = testsupport::random_image(10, 10, 2);
    CHECK(cover_crop_resize(img, 10, 10) == img);
  }
  SUBCASE("wide image crops columns 5..15") {
    const ImageBuffer img = testsupport::random_image(20, 10, 3);
    CHECK(cover_crop_resize(img, 10, 10) == crop(img, 5, 0, 10, 10));
  }
  SUBCASE("tall image crops rows 5..15") {
    const ImageBuffer img = testsupport::random_image(10, 20, 4);
    CHECK(cover_crop_resize(img, 10, 10) == crop(img, 0, 5, 10, 10));
  }
  SUBCASE("upscales to cover") {
    const ImageBuffer img(4, 2, 0.7f);
    const ImageBuffer out = cover_crop_resize(img, 8, 8);
    CHECK(out.width() == 8);
    CHECK(out.height() == 8);
    for (float v : out.data()) CHECK(v == 0.7f);
  }
}

TEST_CASE("ImageBuffer rejects inconsistent construction") {
  CHECK_THROWS_AS(ImageBuffer(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<float>(11)), std::invalid_argument);
}
