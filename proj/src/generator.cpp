#include "diffusemix/generator.hpp"

#include "diffusemix/errors.hpp"

#include <bit>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace diffusemix {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct ParsedEndpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedEndpoint parse_endpoint(const std::string &endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos || endpoint.compare(0, scheme_end, "http") != 0) {
    throw ConfigError("remote endpoint must be an http:// URL: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  ParsedEndpoint out;
  out.scheme_host_port = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.path_prefix = endpoint.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  if (out.scheme_host_port.size() <= scheme_end + 3) {
    throw ConfigError("remote endpoint has no host: " + endpoint);
  }
  return out;
}

bool is_transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

std::string error_message_from(const std::string &body) {
  const json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
    return parsed["error"].get<std::string>();
  }
  return body.substr(0, 200);
}

ImageBuffer decode_success_body(const std::string &body) {
  const json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw ProtocolError("remote response is not a JSON object");
  }
  const auto it = parsed.find("image");
  if (it == parsed.end() || !it->is_string()) {
    throw ProtocolError("remote response lacks a string \"image\" field");
  }
  const auto bytes = base64_decode(it->get_ref<const std::string &>());
  try {
    return decode_image(bytes);
  } catch (const DecodeError &e) {
    throw ProtocolError(std::string("remote image does not decode: ") + e.what());
  }
}

} // namespace

ProceduralBackend::ProceduralBackend(float strength, StylizeOptions options,
                                     std::string template_text)
    : strength_(strength), options_(options), template_(std::move(template_text)) {
  if (!(strength >= 0.0f && strength <= 1.0f)) {
    throw std::invalid_argument("procedural strength must be in [0,1]");
  }
}

std::string ProceduralBackend::backend_id() const {
  std::string id = "procedural/v" + std::to_string(kStylizeRecipeVersion);
  if (strength_ != 1.0f) {
    id += ";strength=" + format_number(strength_);
  }
  if (options_.mosaic_block != StylizeOptions{}.mosaic_block) {
    id += ";mosaic=" + std::to_string(options_.mosaic_block);
  }
  return id;
}

ImageBuffer ProceduralBackend::generate(const ImageBuffer &image,
                                        const std::string &rendered_prompt) const {
  const std::string prompt = strip_template(template_, rendered_prompt);
  return quantize(procedural_stylize(image, prompt, strength_, options_));
}

ImageBuffer remote_generate(const ImageBuffer &image,
                            const std::string &rendered_prompt,
                            const RemoteOptions &options) {
  const ParsedEndpoint ep = parse_endpoint(options.endpoint);
  json request = {{"image", base64_encode(encode_png(image))},
                  {"prompt", rendered_prompt}};
  if (options.strength) {
    request["strength"] = *options.strength;
  }
  const std::string body = request.dump();
  const std::string path = ep.path_prefix + "/generate";

  const auto timeout = options.timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);

  const int attempts = 1 + std::max(0, options.retries);
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && options.backoff.count() > 0) {
      std::this_thread::sleep_for(options.backoff * (1 << std::min(attempt - 1, 6)));
    }
    httplib::Client client(ep.scheme_host_port);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    const auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      return decode_success_body(res->body);
    }
    const std::string message = error_message_from(res->body);
    if (is_transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + message;
      continue;
    }
    throw RemoteError("remote service returned HTTP " +
                      std::to_string(res->status) + ": " + message);
  }
  throw NetworkError("remote generation at " + options.endpoint + " failed after " +
                     std::to_string(attempts) + " attempt(s): " + last_error);
}

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
  parse_endpoint(options_.endpoint);
}

std::string RemoteBackend::backend_id() const {
  std::string id = "remote:" + options_.endpoint;
  if (options_.strength) {
    id += ";strength=" + format_number(*options_.strength);
  }
  return id;
}

ImageBuffer RemoteBackend::generate(const ImageBuffer &image,
                                    const std::string &rendered_prompt) const {
  return remote_generate(image, rendered_prompt, options_);
}

GenerationCache::GenerationCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw IoError("cannot create cache directory " + dir_.string());
  }
}

Digest256 GenerationCache::key(std::string_view backend_id,
                               std::string_view rendered_prompt,
                               const ImageBuffer &image) {
  std::vector<std::uint8_t> raw;
  raw.reserve(8 + image.size() * 4);
  const auto put32 = [&raw](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      raw.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  };
  put32(static_cast<std::uint32_t>(image.width()));
  put32(static_cast<std::uint32_t>(image.height()));
  for (float v : image.data()) {
    put32(std::bit_cast<std::uint32_t>(v));
  }
  return Sha256()
      .update_field(backend_id)
      .update_field(rendered_prompt)
      .update_field(raw)
      .finish();
}

fs::path GenerationCache::entry_path(const Digest256 &key) const {
  const std::string hex = to_hex(key);
  return dir_ / hex.substr(0, 2) / (hex + ".png");
}

std::optional<ImageBuffer> GenerationCache::try_load(const fs::path &path) const {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    return std::nullopt;
  }
  try {
    return load_image(path);
  } catch (const Error &) {
    // Truncated or foreign file: regenerate over it.
    return std::nullopt;
  }
}

ImageBuffer GenerationCache::generate(const GeneratorBackend &backend,
                                      const ImageBuffer &image,
                                      const std::string &rendered_prompt) {
  const Digest256 k = key(backend.backend_id(), rendered_prompt, image);
  const fs::path path = entry_path(k);
  if (auto hit = try_load(path)) {
    hits_.fetch_add(1);
    return std::move(*hit);
  }

  std::lock_guard lock(stripes_[k[0] % kStripes]);
  if (auto hit = try_load(path)) {
    hits_.fetch_add(1);
    return std::move(*hit);
  }
  misses_.fetch_add(1);
  ImageBuffer generated = quantize(backend.generate(image, rendered_prompt));

  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) {
    throw IoError("cannot create cache shard " + path.parent_path().string());
  }
  // Unique temp name, then rename: readers never observe a partial file.
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp."
           << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
           << std::random_device{}();
  const fs::path tmp = path.parent_path() / tmp_name.str();
  write_file_bytes(tmp, encode_png(generated));
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot publish cache entry " + path.string());
  }
  return generated;
}

} // namespace diffusemix
