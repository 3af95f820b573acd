#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lfqa/distort.hpp"
#include "lfqa/error.hpp"

namespace lfqa {

namespace {

// Summed-area table with one row/column of zero padding.
class BoxSum {
 public:
  BoxSum(int width, int height)
      : width_(width), height_(height),
        table_(static_cast<std::size_t>(width + 1) * (height + 1), 0.0) {}

  template <typename F>
  void build(F&& value) {
    for (int y = 0; y < height_; ++y) {
      double row = 0.0;
      for (int x = 0; x < width_; ++x) {
        row += value(y, x);
        at(y + 1, x + 1) = at(y, x + 1) + row;
      }
    }
  }

  // Sum over rows [y0, y1) and columns [x0, x1), clipped to the image.
  double sum(int y0, int y1, int x0, int x1) const {
    y0 = std::max(y0, 0);
    x0 = std::max(x0, 0);
    y1 = std::min(y1, height_);
    x1 = std::min(x1, width_);
    if (y0 >= y1 || x0 >= x1) return 0.0;
    return at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0);
  }

 private:
  double& at(int y, int x) {
    return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }
  double at(int y, int x) const {
    return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }

  int width_;
  int height_;
  std::vector<double> table_;
};

}  // namespace

DisparityField estimate_disparity(const Image& view_a, const Image& view_b,
                                  const BlockMatchOptions& options) {
  if (!view_a.same_shape(view_b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "disparity estimation needs equally sized views");
  }
  if (options.block < 1 || options.max_disparity < 0) {
    throw Error(ErrorCode::kInvalidArgument, "bad block matching options");
  }
  const int width = view_a.width;
  const int height = view_a.height;
  const int lo = options.block / 2;
  const int hi = options.block - lo;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Texture test on the luma of view a.
  const Plane ya = luma(view_a);
  BoxSum luma_sum(width, height);
  BoxSum luma_sq(width, height);
  luma_sum.build([&](int y, int x) { return ya(y, x); });
  luma_sq.build([&](int y, int x) { return ya(y, x) * ya(y, x); });

  std::vector<double> best(n, kInf), left(n, kInf), right(n, kInf);
  std::vector<int> best_shift(n, 0);
  std::vector<double> previous(n, kInf), current(n);
  const int min_valid = std::max(1, options.block * options.block / 4);

  for (int s = -options.max_disparity; s <= options.max_disparity; ++s) {
    BoxSum cost(width, height);
    BoxSum valid(width, height);
    cost.build([&](int y, int x) {
      const int xb = x + s;
      if (xb < 0 || xb >= width) return 0.0;
      double d = 0.0;
      for (int c = 0; c < Image::kChannels; ++c) {
        d += std::abs(view_a(y, x, c) - view_b(y, xb, c));
      }
      return d;
    });
    valid.build([&](int, int x) {
      const int xb = x + s;
      return (xb >= 0 && xb < width) ? 1.0 : 0.0;
    });
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double count = valid.sum(y - lo, y + hi, x - lo, x + hi);
        current[static_cast<std::size_t>(y) * width + x] =
            count >= min_valid ? cost.sum(y - lo, y + hi, x - lo, x + hi) / count
                               : kInf;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (best_shift[i] == s - 1 && best[i] < kInf) right[i] = current[i];
      if (current[i] < best[i]) {
        best[i] = current[i];
        best_shift[i] = s;
        left[i] = previous[i];
        right[i] = kInf;
      }
    }
    std::swap(previous, current);
  }

  DisparityField field{Plane(width, height), std::vector<std::uint8_t>(n, 0)};
  const double min_var = options.min_texture_std * options.min_texture_std;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const double count =
          static_cast<double>(std::min(y + hi, height) - std::max(y - lo, 0)) *
          (std::min(x + hi, width) - std::max(x - lo, 0));
      const double mean = luma_sum.sum(y - lo, y + hi, x - lo, x + hi) / count;
      const double var =
          luma_sq.sum(y - lo, y + hi, x - lo, x + hi) / count - mean * mean;
      if (var < min_var || best[i] == kInf) continue;
      double offset = 0.0;
      if (left[i] < kInf && right[i] < kInf) {
        const double denom = left[i] - 2.0 * best[i] + right[i];
        if (denom > 0.0 && best[i] > 0.0) {
          offset = std::clamp(0.5 * (left[i] - right[i]) / denom, -0.5, 0.5);
        }
      }
      field.disparity.data[i] = best_shift[i] + offset;
      field.confident[i] = 1;
    }
  }
  return field;
}

void cross_check(DisparityField& ab, const DisparityField& ba, double tolerance,
                 double far_sign) {
  const int width = ab.disparity.width;
  const int height = ab.disparity.height;
  std::vector<std::uint8_t> ok(ab.confident.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (!ab.confident[i]) continue;
      const double d = ab.disparity.data[i];
      const auto tx = static_cast<int>(std::lround(x + d));
      if (tx < 0 || tx >= width) continue;
      const std::size_t j = static_cast<std::size_t>(y) * width + tx;
      if (ba.confident[j] && std::abs(d + ba.disparity.data[j]) <= tolerance) ok[i] = 1;
    }
  }
  std::vector<int> left(width), right(width);
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    int last = -1;
    for (int x = 0; x < width; ++x) {
      if (ok[row + x]) last = x;
      left[x] = last;
    }
    last = -1;
    for (int x = width - 1; x >= 0; --x) {
      if (ok[row + x]) last = x;
      right[x] = last;
    }
    for (int x = 0; x < width; ++x) {
      if (ok[row + x]) continue;
      ab.confident[row + x] = 0;
      const int l = left[x];
      const int r = right[x];
      if (l < 0 && r < 0) continue;
      int src = l < 0 ? r : l;
      if (l >= 0 && r >= 0 &&
          far_sign * ab.disparity.data[row + r] < far_sign * ab.disparity.data[row + l]) {
        src = r;
      }
      ab.disparity.data[row + x] = ab.disparity.data[row + src];
    }
  }
}

}  // namespace lfqa
