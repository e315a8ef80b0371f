#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace diffusemix {

// H x W x 3 RGB image, row-major, interleaved, float channels in [0,1].
// Quantization to 8 bits happens only at encode time.
class ImageBuffer {
public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, float fill = 0.0f);
  ImageBuffer(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }

  float at(int x, int y, int c) const {
    return data_[index(x, y, c)];
  }
  float &at(int x, int y, int c) { return data_[index(x, y, c)]; }

  bool same_dims(const ImageBuffer &other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageBuffer &, const ImageBuffer &) = default;

private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               kChannels +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// 8-bit level of a channel value: round-half-to-even of v*255, clamped.
std::uint8_t quantize_level(float v);
// Value of an 8-bit level, level/255.
float level_value(std::uint8_t level);
// Snaps every channel to the nearest 8-bit level. Idempotent.
ImageBuffer quantize(const ImageBuffer &img);

// Decodes PNG or JPEG bytes (sniffed by signature). Alpha is dropped,
// grayscale is expanded to RGB.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const ImageBuffer &img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);
void write_file_bytes(const std::filesystem::path &path,
                      std::span<const std::uint8_t> bytes);

ImageBuffer load_image(const std::filesystem::path &path);
void save_image(const ImageBuffer &img, const std::filesystem::path &path);

// Bilinear resampling with pixel-center alignment: destination pixel x
// samples source coordinate (x + 0.5) * src_w / dst_w - 0.5, clamped to the
// edge. Same-size requests return an exact copy.
ImageBuffer resize_bilinear(const ImageBuffer &img, int width, int height);

// Scales by the smaller factor that still covers (width, height), then
// center-crops. Aspect ratio is preserved; no letterboxing.
ImageBuffer cover_crop_resize(const ImageBuffer &img, int width, int height);

ImageBuffer crop(const ImageBuffer &img, int x0, int y0, int width, int height);

} // namespace diffusemix
