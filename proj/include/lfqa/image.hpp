#pragma once

#include <cstddef>
#include <vector>

namespace lfqa {

// Single-channel raster, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& operator()(int y, int x) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  double operator()(int y, int x) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const Plane&) const = default;
};

// Interleaved RGB raster with samples nominally in [0,1].
struct Image {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w),
        height(h),
        data(static_cast<std::size_t>(w) * h * kChannels, fill) {}

  double& operator()(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  double operator()(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }

  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }

  bool operator==(const Image&) const = default;
};

// Rec.601 luma: 0.299 R + 0.587 G + 0.114 B.
Plane luma(const Image& image);

// Rounds every sample to the nearest multiple of 1/255 (clamped to [0,1]).
Image quantize8(const Image& image);

}  // namespace lfqa
