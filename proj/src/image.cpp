#include "diffusemix/image.hpp"

#include "diffusemix/errors.hpp"
#include "diffusemix/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <png.h>

namespace diffusemix {
namespace fs = std::filesystem;

ImageBuffer::ImageBuffer(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be >= 1");
  }
  data_.assign(pixel_count() * kChannels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be >= 1");
  }
  if (data_.size() != pixel_count() * kChannels) {
    throw std::invalid_argument("image data length must be width*height*3");
  }
}

std::uint8_t quantize_level(float v) {
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(static_cast<double>(v) * 255.0);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

float level_value(std::uint8_t level) {
  return static_cast<float>(level) / 255.0f;
}

ImageBuffer quantize(const ImageBuffer &img) {
  ImageBuffer out = img;
  for (float &v : out.mutable_data()) {
    v = level_value(quantize_level(v));
  }
  return out;
}

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError(std::string("png: ") + image.message);
  }
  // RGBA output keeps 8-bit sRGB samples untouched; alpha is discarded below
  // rather than composited.
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("png: " + msg);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (w < 1 || h < 1) {
    throw DecodeError("png: empty image");
  }
  ImageBuffer out(w, h);
  auto dst = out.mutable_data();
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      dst[p * 3 + c] = level_value(rgba[p * 4 + c]);
    }
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto *err = reinterpret_cast<JpegErrorManager *>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Everything touched after setjmp lives in these outer objects; the
  // vector is resized (not constructed) below the jump point.
  std::vector<std::uint8_t> rgb;
  int w = 0;
  int h = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(w) * 3;
  rgb.resize(stride * static_cast<std::size_t>(h));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (w < 1 || h < 1) {
    throw DecodeError("jpeg: empty image");
  }
  std::vector<float> data(rgb.size());
  std::transform(rgb.begin(), rgb.end(), data.begin(), level_value);
  return ImageBuffer(w, h, std::move(data));
}

} // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    return decode_png(bytes);
  }
  if (is_jpeg(bytes)) {
    return decode_jpeg(bytes);
  }
  throw DecodeError("unsupported image format (expected PNG or JPEG)");
}

std::vector<std::uint8_t> encode_png(const ImageBuffer &img) {
  std::vector<std::uint8_t> rgb(img.size());
  std::transform(img.data().begin(), img.data().end(), rgb.begin(),
                 quantize_level);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, rgb.data(), 0,
                                       nullptr)) {
    throw IoError(std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0,
                                 nullptr)) {
    throw IoError(std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path &path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw FileNotFound("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path &path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

ImageBuffer load_image(const fs::path &path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const DecodeError &e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

void save_image(const ImageBuffer &img, const fs::path &path) {
  write_file_bytes(path, encode_png(img));
}

ImageBuffer resize_bilinear(const ImageBuffer &img, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("resize target must be >= 1x1");
  }
  if (width == img.width() && height == img.height()) {
    return img;
  }
  ImageBuffer out(width, height);
  kernels::bilinear(img.data(), img.width(), img.height(), out.mutable_data(),
                    width, height);
  return out;
}

ImageBuffer crop(const ImageBuffer &img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 1 || height < 1 ||
      x0 + width > img.width() || y0 + height > img.height()) {
    throw std::invalid_argument("crop window outside image");
  }
  ImageBuffer out(width, height);
  auto dst = out.mutable_data();
  const auto src = img.data();
  const std::size_t row = static_cast<std::size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    const std::size_t from =
        (static_cast<std::size_t>(y0 + y) * img.width() + x0) * 3;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), row,
                dst.begin() + static_cast<std::ptrdiff_t>(y * row));
  }
  return out;
}

ImageBuffer cover_crop_resize(const ImageBuffer &img, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("cover-crop target must be >= 1x1");
  }
  const double scale = std::max(static_cast<double>(width) / img.width(),
                                static_cast<double>(height) / img.height());
  const int scaled_w =
      std::max(width, static_cast<int>(std::lround(img.width() * scale)));
  const int scaled_h =
      std::max(height, static_cast<int>(std::lround(img.height() * scale)));
  const ImageBuffer scaled = resize_bilinear(img, scaled_w, scaled_h);
  if (scaled_w == width && scaled_h == height) {
    return scaled;
  }
  return crop(scaled, (scaled_w - width) / 2, (scaled_h - height) / 2, width,
              height);
}

} // namespace diffusemix
