#pragma once

#include "diffusemix/pipeline.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace diffusemix {

// One JSON object per line with the keys, in order: output_path,
// source_path, label, prompt, mask_kind, fractal_id, lambda, sub_seed,
// backend_id.
std::string record_to_jsonl(const AugmentationRecord &record);
// ManifestFormatError on malformed JSON, missing keys or wrong types.
AugmentationRecord record_from_jsonl(const std::string &line);

// Writes {dir}/manifest.jsonl and {dir}/manifest.meta.json
// ({"config_digest": hex, "tool_version": ..., "record_count": n}).
void write_manifest(const Manifest &manifest, const std::filesystem::path &dir);

// ManifestFormatError names the offending line number.
std::vector<AugmentationRecord> read_manifest(const std::filesystem::path &path);

struct ValidationIssue {
  std::size_t line = 0;
  std::string message;
};

// Checks every record: the output file (relative to the manifest's
// directory) exists and decodes, the label equals the source's class
// directory and the output's directory, lambda lies in [0,1], mask_kind is
// known. When input_dir is given, the source file must exist too.
std::vector<ValidationIssue> validate_records(
    const std::vector<AugmentationRecord> &records,
    const std::filesystem::path &manifest_dir,
    const std::optional<std::filesystem::path> &input_dir = std::nullopt);

} // namespace diffusemix
