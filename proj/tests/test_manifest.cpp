#include "diffusemix/errors.hpp"
#include "diffusemix/manifest.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>

#include <json.hpp>

using namespace diffusemix;
using testsupport::TempDir;

namespace {

AugmentationRecord sample_record() {
  AugmentationRecord r;
  r.output_path = "cat/img_01_aug0.png";
  r.source_path = "cat/img_01.png";
  r.label = "cat";
  r.prompt = "ukiyo-e";
  r.mask_kind = MaskKind::TopOn;
  r.fractal_id = "procedural-0007";
  r.lambda = 0.2;
  r.sub_seed = 18446744073709551615ULL;
  r.backend_id = "procedural/v1";
  return r;
}

// A manifest directory whose one record points at a real output file.
void materialize(const TempDir &dir, const AugmentationRecord &r) {
  std::filesystem::create_directories(dir / "cat");
  save_image(ImageBuffer(4, 4, 0.5f), dir / r.output_path);
}

} // namespace

TEST_CASE("records serialize with fixed key order") {
  const std::string line = record_to_jsonl(sample_record());
  CHECK(line ==
        "{\"output_path\":\"cat/img_01_aug0.png\",\"source_path\":\"cat/img_01.png\","
        "\"label\":\"cat\",\"prompt\":\"ukiyo-e\",\"mask_kind\":\"top_on\","
        "\"fractal_id\":\"procedural-0007\",\"lambda\":0.2,"
        "\"sub_seed\":18446744073709551615,\"backend_id\":\"procedural/v1\"}");
  CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("records round-trip through JSONL") {
  const AugmentationRecord r = sample_record();
  CHECK(record_from_jsonl(record_to_jsonl(r)) == r);
  AugmentationRecord odd = r;
  odd.lambda = 0.1 + 0.2;
  odd.prompt = "line\nbreak \"quoted\"";
  CHECK(record_from_jsonl(record_to_jsonl(odd)) == odd);
}

TEST_CASE("malformed records are format errors") {
  CHECK_THROWS_AS(record_from_jsonl("{not json"), ManifestFormatError);
  CHECK_THROWS_AS(record_from_jsonl("[1,2]"), ManifestFormatError);
  auto j = nlohmann::json::parse(record_to_jsonl(sample_record()));
  j.erase("label");
  CHECK_THROWS_AS(record_from_jsonl(j.dump()), ManifestFormatError);
  j = nlohmann::json::parse(record_to_jsonl(sample_record()));
  j["sub_seed"] = -1;
  CHECK_THROWS_AS(record_from_jsonl(j.dump()), ManifestFormatError);
  j["sub_seed"] = 1;
  j["lambda"] = "0.2";
  CHECK_THROWS_AS(record_from_jsonl(j.dump()), ManifestFormatError);
}

TEST_CASE("write and read a manifest with its sidecar") {
  TempDir dir;
  Manifest m;
  m.records = {sample_record(), sample_record()};
  m.records[1].output_path = "cat/img_01_aug1.png";
  m.config_digest = sha256(std::string("cfg"));
  write_manifest(m, dir.path());
  CHECK(read_manifest(dir / std::string(kManifestFile)) == m.records);
  const auto meta =
      nlohmann::json::parse(testsupport::read_text(dir / std::string(kManifestMetaFile)));
  CHECK(meta["config_digest"] == to_hex(m.config_digest));
  CHECK(meta["tool_version"] == std::string(kToolVersion));
  CHECK(meta["record_count"] == 2);
}

TEST_CASE("read_manifest names the offending line") {
  TempDir dir;
  {
    std::ofstream out(dir / "manifest.jsonl");
    out << record_to_jsonl(sample_record()) << "\n\n" << "{\"output_path\":\n";
  }
  try {
    read_manifest(dir / "manifest.jsonl");
    FAIL("expected ManifestFormatError");
  } catch (const ManifestFormatError &e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(read_manifest(dir / "absent.jsonl"), FileNotFound);
}

TEST_CASE("validate accepts a consistent record") {
  TempDir dir;
  const AugmentationRecord r = sample_record();
  materialize(dir, r);
  CHECK(validate_records({r}, dir.path()).empty());
}

TEST_CASE("validate reports each kind of inconsistency") {
  TempDir dir;
  const AugmentationRecord good = sample_record();
  materialize(dir, good);

  AugmentationRecord wrong_label = good;
  wrong_label.label = "dog";
  CHECK(validate_records({wrong_label}, dir.path()).size() == 2);

  AugmentationRecord bad_lambda = good;
  bad_lambda.lambda = 1.5;
  CHECK(validate_records({bad_lambda}, dir.path()).size() == 1);

  AugmentationRecord bad_kind = good;
  bad_kind.mask_kind = static_cast<MaskKind>(0xFF);
  CHECK(validate_records({bad_kind}, dir.path()).size() == 1);

  AugmentationRecord missing = good;
  missing.output_path = "cat/gone.png";
  const auto issues = validate_records({good, missing}, dir.path());
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].line == 2);
  CHECK(issues[0].message.find("gone.png") != std::string::npos);

  std::ofstream(dir / "cat/junk.png") << "junk";
  AugmentationRecord junk = good;
  junk.output_path = "cat/junk.png";
  CHECK(validate_records({junk}, dir.path()).size() == 1);

  // Sources are checked only when the input directory is supplied.
  CHECK(validate_records({good}, dir.path(), dir / "inputs").size() == 1);
}
