#include "lfqa/image.hpp"

#include <algorithm>
#include <cmath>

namespace lfqa {

Plane luma(const Image& image) {
  Plane out(image.width, image.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double* px = &image.data[i * Image::kChannels];
    out.data[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

Image quantize8(const Image& image) {
  Image out = image;
  for (double& v : out.data) {
    v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
  return out;
}

}  // namespace lfqa
