#include "diffusemix/errors.hpp"
#include "diffusemix/masking.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace diffusemix;

namespace {
constexpr MaskKind kAll[] = {MaskKind::LeftOn, MaskKind::RightOn, MaskKind::TopOn,
                             MaskKind::BottomOn};
}

TEST_CASE("make_mask splits at floor(d/2)") {
  SUBCASE("even width") {
    const Mask m = make_mask(4, 2, MaskKind::LeftOn);
    for (int y = 0; y < 2; ++y) {
      CHECK(m.at(0, y) == 1);
      CHECK(m.at(1, y) == 1);
      CHECK(m.at(2, y) == 0);
      CHECK(m.at(3, y) == 0);
    }
  }
  SUBCASE("odd width gives the left half floor(w/2) columns") {
    const Mask m = make_mask(5, 1, MaskKind::LeftOn);
    const std::uint8_t expected[] = {1, 1, 0, 0, 0};
    for (int x = 0; x < 5; ++x) CHECK(m.at(x, 0) == expected[x]);
  }
  SUBCASE("top and bottom are complementary") {
    const Mask top = make_mask(2, 4, MaskKind::TopOn);
    const Mask bottom = make_mask(2, 4, MaskKind::BottomOn);
    for (std::size_t i = 0; i < top.bits().size(); ++i) {
      CHECK(top.bits()[i] + bottom.bits()[i] == 1);
    }
  }
}

TEST_CASE("mask invariants over a dimension sweep") {
  for (int w = 1; w <= 64; ++w) {
    for (int h = 1; h <= 64; h += (w % 7) + 1) {
      for (MaskKind k : kAll) {
        const Mask m = make_mask(w, h, k);
        for (auto b : m.bits()) REQUIRE((b == 0 || b == 1));
        const Mask f = make_mask(w, h, flip(k));
        REQUIRE(f == m.complement());
        REQUIRE(m.popcount() == static_cast<std::size_t>(w) * h - f.popcount());
        const bool vertical = k == MaskKind::LeftOn || k == MaskKind::RightOn;
        if ((vertical && w % 2 == 0) || (!vertical && h % 2 == 0)) {
          REQUIRE(m.popcount() * 2 == static_cast<std::size_t>(w) * h);
        }
      }
    }
  }
}

TEST_CASE("flip is an involution pairing complements") {
  CHECK(flip(MaskKind::LeftOn) == MaskKind::RightOn);
  CHECK(flip(MaskKind::TopOn) == MaskKind::BottomOn);
  for (MaskKind k : kAll) CHECK(flip(flip(k)) == k);
}

TEST_CASE("mask kind and set names round-trip") {
  for (MaskKind k : kAll) CHECK(parse_mask_kind(to_string(k)) == k);
  CHECK(to_string(MaskKind::BottomOn) == "bottom_on");
  CHECK_FALSE(parse_mask_kind("diagonal"));
  CHECK(parse_mask_set("vertical") == MaskSet::VerticalOnly);
  CHECK(parse_mask_set("vertical_horizontal") == MaskSet::VerticalHorizontal);
  CHECK(parse_mask_set("full") == MaskSet::Full);
  CHECK_FALSE(parse_mask_set("all"));
}

TEST_CASE("concatenate endpoints and a worked example") {
  const ImageBuffer original = testsupport::random_image(6, 5, 1);
  const ImageBuffer generated = testsupport::random_image(6, 5, 2);
  CHECK(concatenate(original, generated, Mask(6, 5, 1)) == generated);
  CHECK(concatenate(original, generated, Mask(6, 5, 0)) == original);

  // Elementwise: H = G*M + I*(1-M) with M = [1 | 0].
  const ImageBuffer i2(2, 1, std::vector<float>{0.1f, 0.1f, 0.1f, 0.2f, 0.2f, 0.2f});
  const ImageBuffer g2(2, 1, std::vector<float>{0.9f, 0.9f, 0.9f, 0.3f, 0.3f, 0.3f});
  const ImageBuffer h2 = concatenate(i2, g2, make_mask(2, 1, MaskKind::LeftOn));
  for (int c = 0; c < 3; ++c) {
    CHECK(h2.at(0, 0, c) == 0.9f);
    CHECK(h2.at(1, 0, c) == 0.2f);
  }
}

TEST_CASE("complement closure: swapping inputs equals complementing the mask") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int w = 1 + static_cast<int>(seed % 13);
    const int h = 1 + static_cast<int>((seed * 7) % 11);
    const ImageBuffer a = testsupport::random_image(w, h, seed);
    const ImageBuffer b = testsupport::random_image(w, h, seed + 1000);
    for (MaskKind k : kAll) {
      const Mask m = make_mask(w, h, k);
      CHECK(concatenate(a, b, m) == concatenate(b, a, m.complement()));
    }
  }
}

TEST_CASE("original half is preserved bit-exactly") {
  const ImageBuffer original = testsupport::random_image(9, 7, 3);
  const ImageBuffer generated = testsupport::random_image(9, 7, 4);
  for (MaskKind k : kAll) {
    const Mask m = make_mask(9, 7, k);
    const ImageBuffer h = concatenate(original, generated, m);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x)
        for (int c = 0; c < 3; ++c)
          CHECK(h.at(x, y, c) == (m.at(x, y) ? generated : original).at(x, y, c));
  }
}

TEST_CASE("concatenate rejects mismatched dims") {
  CHECK_THROWS_AS(concatenate(ImageBuffer(4, 4), ImageBuffer(4, 3), Mask(4, 4)),
                  DimensionMismatch);
  CHECK_THROWS_AS(concatenate(ImageBuffer(4, 4), ImageBuffer(4, 4), Mask(3, 4)),
                  DimensionMismatch);
}

TEST_CASE("sample_mask_kind respects the configured set") {
  RngStream rng(99);
  for (int i = 0; i < 200; ++i) CHECK(sample_mask_kind(MaskSet::VerticalOnly, rng) == MaskKind::LeftOn);
  for (int i = 0; i < 2000; ++i) {
    const MaskKind k = sample_mask_kind(MaskSet::VerticalHorizontal, rng);
    CHECK((k == MaskKind::LeftOn || k == MaskKind::TopOn));
  }
  std::map<MaskKind, int> counts;
  constexpr int draws = 40000;
  for (int i = 0; i < draws; ++i) ++counts[sample_mask_kind(MaskSet::Full, rng)];
  CHECK(counts.size() == 4);
  for (const auto &[k, n] : counts) {
    CHECK(std::abs(static_cast<double>(n) / draws - 0.25) <= 0.03);
  }
}
