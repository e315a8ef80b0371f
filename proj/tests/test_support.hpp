#pragma once

#include "diffusemix/image.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
struct Request;
struct Response;
} // namespace httplib

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
  explicit TempDir(const std::string &prefix = "diffusemix");
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }
  fs::path operator/(const std::string &child) const { return path_ / child; }

private:
  fs::path path_;
};

// Uniform random channels, drawn from std::mt19937_64 (independent of the
// library's own generator).
diffusemix::ImageBuffer random_image(int width, int height, std::uint64_t seed);

// Same, snapped to 8-bit levels so that save/load round-trips exactly.
diffusemix::ImageBuffer random_image_8bit(int width, int height, std::uint64_t seed);

// root/class_XX/img_YY.png with deterministic random content.
void make_dataset(const fs::path &root, int classes, int per_class, int width,
                  int height, std::uint64_t seed);

// SHA-256 over (relative path, file bytes) of every regular file, sorted.
std::string tree_hash(const fs::path &root);

std::string read_text(const fs::path &path);

// Minimal in-process HTTP server listening on 127.0.0.1:<ephemeral>.
class MockServer {
public:
  using Handler = std::function<void(const httplib::Request &, httplib::Response &)>;

  explicit MockServer(Handler generate_handler);
  ~MockServer();

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

// Echo server body: returns the request's image unchanged.
void echo_handler(const httplib::Request &req, httplib::Response &res);

// Handler that ignores the request and answers with a fixed image.
MockServer::Handler fixed_image_handler(diffusemix::ImageBuffer image);

// A localhost port with nothing listening on it.
int unused_port();

} // namespace testsupport
