#include "warp.hpp"

#include <cmath>
#include <limits>

namespace lfqa::detail {

Splat forward_warp(const Image& source, const Plane& disparity, double scale,
                   double z_sign, double z_tolerance) {
  const int width = source.width;
  const int height = source.height;
  Splat out{Image(width, height),
            Plane(width, height, -std::numeric_limits<double>::infinity()),
            std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  std::vector<double> weight(static_cast<std::size_t>(width) * height, 0.0);
  auto deposit = [&](int y, int tx, double w, double z, int x) {
    if (tx < 0 || tx >= width || w <= 1e-9) return;
    const std::size_t idx = static_cast<std::size_t>(y) * width + tx;
    double* acc = &out.image.data[idx * Image::kChannels];
    if (weight[idx] == 0.0 || z > out.z.data[idx] + z_tolerance) {
      weight[idx] = 0.0;
      for (int c = 0; c < Image::kChannels; ++c) acc[c] = 0.0;
      out.z.data[idx] = z;
    } else if (z < out.z.data[idx] - z_tolerance) {
      return;
    } else {
      out.z.data[idx] = std::max(out.z.data[idx], z);
    }
    weight[idx] += w;
    for (int c = 0; c < Image::kChannels; ++c) acc[c] += w * source(y, x, c);
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d = disparity(y, x);
      const double target = x + scale * d;
      const double base = std::floor(target);
      const double frac = target - base;
      const auto tx = static_cast<int>(base);
      deposit(y, tx, 1.0 - frac, z_sign * d, x);
      deposit(y, tx + 1, frac, z_sign * d, x);
    }
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i] == 0.0) continue;
    out.valid[i] = 1;
    for (int c = 0; c < Image::kChannels; ++c) {
      out.image.data[i * Image::kChannels + c] /= weight[i];
    }
  }
  return out;
}

void fill_holes(Splat& splat) {
  const int width = splat.image.width;
  const int height = splat.image.height;
  std::vector<int> left(width), right(width);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* valid = &splat.valid[static_cast<std::size_t>(y) * width];
    int last = -1;
    for (int x = 0; x < width; ++x) {
      if (valid[x]) last = x;
      left[x] = last;
    }
    last = -1;
    for (int x = width - 1; x >= 0; --x) {
      if (valid[x]) last = x;
      right[x] = last;
    }
    for (int x = 0; x < width; ++x) {
      if (valid[x]) continue;
      const int l = left[x];
      const int r = right[x];
      int src = -1;
      if (l < 0) {
        src = r;
      } else if (r < 0) {
        src = l;
      } else if (x - l != r - x) {
        src = (x - l < r - x) ? l : r;
      } else {
        src = splat.z(y, l) <= splat.z(y, r) ? l : r;
      }
      if (src < 0) continue;
      for (int c = 0; c < Image::kChannels; ++c) {
        splat.image(y, x, c) = splat.image(y, src, c);
      }
    }
  }
  // Filled pixels stay marked invalid so callers can still tell them apart.
}

Image blend_splats(const Splat& a, const Splat& b, double t,
                   double z_tolerance) {
  const int width = a.image.width;
  const int height = a.image.height;
  Splat merged{Image(width, height),
               Plane(width, height, -std::numeric_limits<double>::infinity()),
               std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  for (std::size_t i = 0; i < merged.valid.size(); ++i) {
    bool va = a.valid[i] != 0;
    bool vb = b.valid[i] != 0;
    if (!va && !vb) continue;
    if (va && vb && std::abs(a.z.data[i] - b.z.data[i]) > z_tolerance) {
      (a.z.data[i] > b.z.data[i] ? vb : va) = false;
    }
    merged.valid[i] = 1;
    for (int c = 0; c < Image::kChannels; ++c) {
      const double pa = a.image.data[i * Image::kChannels + c];
      const double pb = b.image.data[i * Image::kChannels + c];
      merged.image.data[i * Image::kChannels + c] =
          va && vb ? (1.0 - t) * pa + t * pb : (va ? pa : pb);
    }
    merged.z.data[i] = va && vb ? std::min(a.z.data[i], b.z.data[i])
                                : (va ? a.z.data[i] : b.z.data[i]);
  }
  fill_holes(merged);
  return std::move(merged.image);
}

}  // namespace lfqa::detail
