#include "lfqa/light_field.hpp"

#include <cmath>
#include <string>

#include "lfqa/error.hpp"

namespace lfqa {

void validate(const LightField& lf) {
  if (lf.views.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "light field has no views");
  }
  const Image& first = lf.views.front();
  for (const Image& view : lf.views) {
    if (!view.same_shape(first)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "inconsistent image dimensions across views");
    }
    for (double v : view.data) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "pixel value outside [0,1] or not finite");
      }
    }
  }
  const Manifest& m = lf.manifest;
  if (m.angular_count != lf.view_count() || m.width != first.width ||
      m.height != first.height) {
    throw Error(ErrorCode::kViewCountMismatch,
                "manifest does not describe the stored views");
  }
  if (!(m.max_step_disparity > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max_step_disparity must be > 0");
  }
  if (!m.view_positions.empty()) {
    if (static_cast<int>(m.view_positions.size()) != lf.view_count()) {
      throw Error(ErrorCode::kViewCountMismatch,
                  "view_positions length differs from view count");
    }
    for (std::size_t i = 1; i < m.view_positions.size(); ++i) {
      if (!(m.view_positions[i] > m.view_positions[i - 1])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "view positions must be strictly increasing");
      }
    }
  }
}

std::vector<double> view_positions(const LightField& lf) {
  if (!lf.manifest.view_positions.empty()) return lf.manifest.view_positions;
  std::vector<double> positions(lf.views.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = static_cast<double>(i);
  }
  return positions;
}

Manifest make_manifest(const std::string& name, const std::vector<Image>& views,
                       double max_step_disparity) {
  Manifest m;
  m.name = name;
  m.angular_count = static_cast<int>(views.size());
  m.width = views.empty() ? 0 : views.front().width;
  m.height = views.empty() ? 0 : views.front().height;
  m.max_step_disparity = max_step_disparity;
  return m;
}

Epi extract_epi(const LightField& lf, int row) {
  if (row < 0 || row >= lf.height()) {
    throw Error(ErrorCode::kOutOfRange,
                "EPI row " + std::to_string(row) + " outside [0," +
                    std::to_string(lf.height()) + ")");
  }
  const int width = lf.width();
  Epi epi(width, lf.view_count());
  for (int w = 0; w < lf.view_count(); ++w) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < Image::kChannels; ++c) {
        epi(w, x, c) = lf.views[w](row, x, c);
      }
    }
  }
  return epi;
}

std::vector<int> subsample_indices(int view_count, int k) {
  if (k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "subsampling factor must be >= 1");
  }
  if (view_count > 1 && k >= view_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "subsampling factor " + std::to_string(k) +
                    " leaves fewer than 2 views out of " +
                    std::to_string(view_count));
  }
  std::vector<int> kept;
  for (int i = 0; i < view_count; i += k) kept.push_back(i);
  if (kept.back() != view_count - 1) kept.push_back(view_count - 1);
  return kept;
}

LightField subsample_angular(const LightField& lf, int k) {
  const std::vector<int> kept = subsample_indices(lf.view_count(), k);
  if (k == 1) return lf;
  const std::vector<double> positions = view_positions(lf);
  LightField out;
  out.manifest = lf.manifest;
  out.manifest.view_positions.clear();
  for (int i : kept) {
    out.views.push_back(lf.views[i]);
    out.manifest.view_positions.push_back(positions[i]);
  }
  out.manifest.angular_count = out.view_count();
  return out;
}

DepthMap subsample_angular(const DepthMap& depth, int k) {
  DepthMap out;
  for (int i : subsample_indices(static_cast<int>(depth.views.size()), k)) {
    out.views.push_back(depth.views[i]);
  }
  return out;
}

}  // namespace lfqa
