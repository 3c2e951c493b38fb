#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgssa/error.hpp"

namespace dgssa {

/// Row-major 2-D pixel grid.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), fill) {}
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != size()) {
      throw Error(Errc::DimensionMismatch, "grid data length does not match width*height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return size() == 0; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Foreground = 1, background = 0.
using BinaryMask = Grid<std::uint8_t>;
/// Intensities in [0, 1].
using GrayImage = Grid<double>;

template <typename A, typename B>
bool same_shape(const Grid<A>& a, const Grid<B>& b) {
  return a.width() == b.width() && a.height() == b.height();
}

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!same_shape(a, b)) {
    throw Error(Errc::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

inline std::size_t count_foreground(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(), [](auto v) { return v != 0; }));
}

inline BinaryMask complement(const BinaryMask& m) {
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

/// True when every foreground pixel of `inner` is also foreground in `outer`.
inline bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner, outer, "is_subset");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] && !outer[i]) return false;
  }
  return true;
}

/// Three-channel image, planar storage (channel-major), intensities in [0, 1].
class RgbImage {
 public:
  static constexpr int kChannels = 3;

  RgbImage() = default;
  RgbImage(int width, int height, double fill = 0.0)
      : width_(width), height_(height), data_(plane_size(width, height) * kChannels, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t plane_size() const noexcept { return plane_size(width_, height_); }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int c, int x, int y) { return data_[offset(c, x, y)]; }
  double operator()(int c, int x, int y) const { return data_[offset(c, x, y)]; }

  std::span<double> channel(int c) { return std::span<double>(data_).subspan(c * plane_size(), plane_size()); }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  static std::size_t plane_size(int w, int h) {
    return static_cast<std::size_t>(std::max(w, 0)) * static_cast<std::size_t>(std::max(h, 0));
  }
  std::size_t offset(int c, int x, int y) const {
    return static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

inline bool same_shape(const RgbImage& a, const RgbImage& b) {
  return a.width() == b.width() && a.height() == b.height();
}

inline void require_same_shape(const RgbImage& a, const RgbImage& b, const char* what) {
  if (!same_shape(a, b)) throw Error(Errc::DimensionMismatch, what);
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Bilinear resampling with pixel-center alignment.
inline RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  RgbImage out(width, height);
  if (src.width() == 0 || src.height() == 0) return out;
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < RgbImage::kChannels; ++c) {
        const double top = src(c, x0, y0) * (1.0 - wx) + src(c, x1, y0) * wx;
        const double bottom = src(c, x0, y1) * (1.0 - wx) + src(c, x1, y1) * wx;
        out(c, x, y) = clamp01(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

/// Interleaved 8-bit pixels as stored in PNG files (1 or 3 channels).
struct PixelBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const PixelBuffer&, const PixelBuffer&) = default;
};

inline std::uint8_t to_byte(double v) {
  // round-half-up on the [0, 255] scale
  return static_cast<std::uint8_t>(std::floor(clamp01(v) * 255.0 + 0.5));
}

inline PixelBuffer to_pixels(const RgbImage& img) {
  PixelBuffer out{img.width(), img.height(), 3, std::vector<std::uint8_t>(img.plane_size() * 3)};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * img.width() + x) * 3;
      for (int c = 0; c < 3; ++c) out.bytes[base + c] = to_byte(img(c, x, y));
    }
  }
  return out;
}

inline RgbImage to_rgb(const PixelBuffer& px) {
  RgbImage out(px.width, px.height);
  for (int y = 0; y < px.height; ++y) {
    for (int x = 0; x < px.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * px.width + x) * px.channels;
      for (int c = 0; c < 3; ++c) {
        const int src_c = px.channels == 1 ? 0 : c;
        out(c, x, y) = px.bytes[base + src_c] / 255.0;
      }
    }
  }
  return out;
}

inline GrayImage to_gray(const PixelBuffer& px) {
  GrayImage out(px.width, px.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (px.channels == 1) {
      out[i] = px.bytes[i] / 255.0;
    } else {
      const std::size_t b = i * px.channels;
      out[i] = (px.bytes[b] + px.bytes[b + 1] + px.bytes[b + 2]) / (3.0 * 255.0);
    }
  }
  return out;
}

/// Foreground where the (first-channel) byte exceeds `cutoff`.
inline BinaryMask to_mask(const PixelBuffer& px, int cutoff = 127) {
  BinaryMask out(px.width, px.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = px.bytes[i * px.channels] > cutoff ? 1 : 0;
  return out;
}

inline PixelBuffer to_pixels(const BinaryMask& m) {
  PixelBuffer out{m.width(), m.height(), 1, std::vector<std::uint8_t>(m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) out.bytes[i] = m[i] ? 255 : 0;
  return out;
}

inline PixelBuffer to_pixels(const GrayImage& g) {
  PixelBuffer out{g.width(), g.height(), 1, std::vector<std::uint8_t>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) out.bytes[i] = to_byte(g[i]);
  return out;
}

}  // namespace dgssa
