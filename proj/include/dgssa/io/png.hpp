#pragma once

// 8-bit PNG codec on top of libpng's simplified API.

#include <png.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <utility>

#include "dgssa/error.hpp"
#include "dgssa/image.hpp"

namespace dgssa::io {

namespace detail {

class PngImage {
 public:
  PngImage() {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image_); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;

  png_image* get() { return &image_; }
  std::string message() const { return image_.message; }

 private:
  png_image image_;
};

}  // namespace detail

struct PngInfo {
  int width = 0;
  int height = 0;
  int channels = 0;
};

inline PngInfo png_info(const std::filesystem::path& path) {
  detail::PngImage img;
  if (!png_image_begin_read_from_file(img.get(), path.string().c_str())) {
    throw Error(Errc::Io, path.string() + ": " + img.message());
  }
  const bool color = (img.get()->format & PNG_FORMAT_FLAG_COLOR) != 0;
  return {static_cast<int>(img.get()->width), static_cast<int>(img.get()->height), color ? 3 : 1};
}

/// Reads gray or color PNGs as 1 or 3 channels of 8-bit samples; alpha is
/// composited onto black.
inline PixelBuffer read_png(const std::filesystem::path& path) {
  detail::PngImage img;
  if (!png_image_begin_read_from_file(img.get(), path.string().c_str())) {
    throw Error(Errc::Io, path.string() + ": " + img.message());
  }
  const bool color = (img.get()->format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.get()->format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  PixelBuffer out;
  out.width = static_cast<int>(img.get()->width);
  out.height = static_cast<int>(img.get()->height);
  out.channels = color ? 3 : 1;
  out.bytes.resize(PNG_IMAGE_SIZE(*img.get()));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(img.get(), &black, out.bytes.data(), 0, nullptr)) {
    throw Error(Errc::Io, path.string() + ": " + img.message());
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const PixelBuffer& px) {
  if (px.channels != 1 && px.channels != 3) throw Error(Errc::Format, "PNG writer supports 1 or 3 channels");
  detail::PngImage img;
  img.get()->width = static_cast<png_uint_32>(px.width);
  img.get()->height = static_cast<png_uint_32>(px.height);
  img.get()->format = px.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(img.get(), path.string().c_str(), 0, px.bytes.data(), 0, nullptr)) {
    throw Error(Errc::Io, path.string() + ": " + img.message());
  }
}

inline BinaryMask read_mask(const std::filesystem::path& path) { return to_mask(read_png(path)); }
inline RgbImage read_rgb(const std::filesystem::path& path) { return to_rgb(read_png(path)); }

}  // namespace dgssa::io
