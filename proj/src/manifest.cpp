#include "diffusemix/manifest.hpp"

#include "diffusemix/errors.hpp"

#include <fstream>

#include <json.hpp>

namespace diffusemix {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string record_to_jsonl(const AugmentationRecord &r) {
  ordered_json j;
  j["output_path"] = r.output_path;
  j["source_path"] = r.source_path;
  j["label"] = r.label;
  j["prompt"] = r.prompt;
  j["mask_kind"] = std::string(to_string(r.mask_kind));
  j["fractal_id"] = r.fractal_id;
  j["lambda"] = r.lambda;
  j["sub_seed"] = r.sub_seed;
  j["backend_id"] = r.backend_id;
  return j.dump();
}

namespace {

template <typename T>
T field(const ordered_json &j, const char *key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ManifestFormatError(std::string("missing field \"") + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ManifestFormatError(std::string("field \"") + key + "\" has the wrong type");
  }
}

} // namespace

AugmentationRecord record_from_jsonl(const std::string &line) {
  const ordered_json j = ordered_json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ManifestFormatError("not a JSON object");
  }
  AugmentationRecord r;
  r.output_path = field<std::string>(j, "output_path");
  r.source_path = field<std::string>(j, "source_path");
  r.label = field<std::string>(j, "label");
  r.prompt = field<std::string>(j, "prompt");
  const auto kind_text = field<std::string>(j, "mask_kind");
  // Unknown kinds are a validation finding, not a format error.
  r.mask_kind = parse_mask_kind(kind_text).value_or(static_cast<MaskKind>(0xFF));
  r.fractal_id = field<std::string>(j, "fractal_id");
  if (!j.contains("lambda") || !j["lambda"].is_number()) {
    throw ManifestFormatError("field \"lambda\" must be a number");
  }
  r.lambda = j["lambda"].get<double>();
  if (!j.contains("sub_seed") || !j["sub_seed"].is_number_unsigned()) {
    throw ManifestFormatError("field \"sub_seed\" must be an unsigned integer");
  }
  r.sub_seed = j["sub_seed"].get<std::uint64_t>();
  r.backend_id = field<std::string>(j, "backend_id");
  return r;
}

void write_manifest(const Manifest &manifest, const fs::path &dir) {
  {
    std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
    for (const auto &r : manifest.records) {
      out << record_to_jsonl(r) << '\n';
    }
    if (!out) {
      throw IoError("cannot write " + (dir / kManifestFile).string());
    }
  }
  ordered_json meta;
  meta["config_digest"] = to_hex(manifest.config_digest);
  meta["tool_version"] = std::string(kToolVersion);
  meta["record_count"] = manifest.records.size();
  std::ofstream out(dir / kManifestMetaFile, std::ios::binary | std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) {
    throw IoError("cannot write " + (dir / kManifestMetaFile).string());
  }
}

std::vector<AugmentationRecord> read_manifest(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileNotFound("cannot open manifest " + path.string());
  }
  std::vector<AugmentationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    try {
      records.push_back(record_from_jsonl(line));
    } catch (const ManifestFormatError &e) {
      throw ManifestFormatError(path.string() + ":" + std::to_string(line_no) +
                                ": " + e.what());
    }
  }
  return records;
}

std::vector<ValidationIssue> validate_records(
    const std::vector<AugmentationRecord> &records, const fs::path &manifest_dir,
    const std::optional<fs::path> &input_dir) {
  std::vector<ValidationIssue> issues;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    const auto report = [&](std::string msg) {
      issues.push_back({i + 1, std::move(msg)});
    };
    const fs::path source(r.source_path);
    const fs::path output(r.output_path);
    if (source.parent_path().filename().string() != r.label) {
      report("label \"" + r.label + "\" does not match source directory of " +
             r.source_path);
    }
    if (output.parent_path().filename().string() != r.label) {
      report("label \"" + r.label + "\" does not match output directory of " +
             r.output_path);
    }
    if (!(r.lambda >= 0.0 && r.lambda <= 1.0)) {
      report("lambda " + std::to_string(r.lambda) + " outside [0,1]");
    }
    if (!parse_mask_kind(to_string(r.mask_kind))) {
      report("unknown mask_kind");
    }
    const fs::path out_file = manifest_dir / output;
    std::error_code ec;
    if (!fs::is_regular_file(out_file, ec)) {
      report("missing output file " + out_file.string());
    } else {
      try {
        (void)load_image(out_file);
      } catch (const Error &e) {
        report("output does not decode: " + std::string(e.what()));
      }
    }
    if (input_dir && !fs::is_regular_file(*input_dir / source, ec)) {
      report("missing source file " + (*input_dir / source).string());
    }
  }
  return issues;
}

} // namespace diffusemix
