#pragma once

#include "diffusemix/rng.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace diffusemix {

// Ordered set of style prompts plus the instruction template they are
// rendered into before reaching a generator backend.
class PromptLibrary {
public:
  static constexpr std::string_view kPlaceholder = "{prompt}";
  static constexpr std::string_view kDefaultTemplate =
      "A transformed version of image into {prompt}";

  // Throws std::invalid_argument when entries are empty, duplicated or
  // blank, or the template does not hold exactly one placeholder.
  PromptLibrary(std::vector<std::string> entries,
                std::string template_text = std::string(kDefaultTemplate));

  const std::vector<std::string> &entries() const { return entries_; }
  const std::string &template_text() const { return template_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view prompt) const;

  // Template with the placeholder replaced. UnknownPrompt if not an entry.
  std::string render(std::string_view prompt) const;

  // Inverse of render for strings produced by this template; returns the
  // input unchanged when it does not match the template's frame.
  std::string strip_template(std::string_view rendered) const;

private:
  std::vector<std::string> entries_;
  std::string template_;
};

// Inverse of template substitution: the text between the template's prefix
// and suffix, or `rendered` unchanged when the frame does not match.
std::string strip_template(std::string_view template_text,
                           std::string_view rendered);

PromptLibrary default_library();

// UTF-8 text, one prompt per line. Blank lines and lines starting with '#'
// are skipped; surrounding whitespace is trimmed.
PromptLibrary load_prompt_file(const std::filesystem::path &path);

const std::string &sample_prompt(const PromptLibrary &lib, RngStream &rng);

} // namespace diffusemix
