#include "diffusemix/prompts.hpp"

#include "diffusemix/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace diffusemix {
namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

} // namespace

PromptLibrary::PromptLibrary(std::vector<std::string> entries,
                             std::string template_text)
    : entries_(std::move(entries)), template_(std::move(template_text)) {
  if (entries_.empty()) {
    throw std::invalid_argument("prompt library must not be empty");
  }
  std::set<std::string_view> seen;
  for (const auto &e : entries_) {
    if (trim(e).empty()) {
      throw std::invalid_argument("prompt library contains an empty prompt");
    }
    if (!seen.insert(e).second) {
      throw std::invalid_argument("duplicate prompt: " + e);
    }
  }
  if (count_occurrences(template_, kPlaceholder) != 1) {
    throw std::invalid_argument(
        "prompt template must contain exactly one {prompt} placeholder");
  }
}

bool PromptLibrary::contains(std::string_view prompt) const {
  return std::find(entries_.begin(), entries_.end(), prompt) != entries_.end();
}

std::string PromptLibrary::render(std::string_view prompt) const {
  if (!contains(prompt)) {
    throw UnknownPrompt("prompt not in library: " + std::string(prompt));
  }
  std::string out = template_;
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), prompt);
  return out;
}

std::string PromptLibrary::strip_template(std::string_view rendered) const {
  return diffusemix::strip_template(template_, rendered);
}

std::string strip_template(std::string_view template_text,
                           std::string_view rendered) {
  const auto pos = template_text.find(PromptLibrary::kPlaceholder);
  if (pos == std::string_view::npos) {
    return std::string(rendered);
  }
  const std::string_view head = template_text.substr(0, pos);
  const std::string_view tail =
      template_text.substr(pos + PromptLibrary::kPlaceholder.size());
  if (rendered.size() >= head.size() + tail.size() &&
      rendered.starts_with(head) && rendered.ends_with(tail)) {
    return std::string(rendered.substr(
        head.size(), rendered.size() - head.size() - tail.size()));
  }
  return std::string(rendered);
}

PromptLibrary default_library() {
  return PromptLibrary({"autumn", "snowy", "sunset", "watercolor art", "rainbow",
                        "aurora", "mosaic", "ukiyo-e", "a sketch with crayon"});
}

PromptLibrary load_prompt_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw FileNotFound("cannot open prompt file: " + path.string());
  }
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    entries.emplace_back(t);
  }
  try {
    return PromptLibrary(std::move(entries));
  } catch (const std::invalid_argument &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

const std::string &sample_prompt(const PromptLibrary &lib, RngStream &rng) {
  return lib.entries()[rng.uniform_index(lib.size())];
}

} // namespace diffusemix
