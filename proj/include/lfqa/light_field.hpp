#pragma once

#include <string>
#include <vector>

#include "lfqa/image.hpp"

namespace lfqa {

enum class SourceKind { kSynthetic, kExternal };

struct Manifest {
  std::string name;
  int angular_count = 0;
  int width = 0;
  int height = 0;
  // Largest on-screen disparity between consecutive views, in pixels.
  double max_step_disparity = 1.0;
  SourceKind source = SourceKind::kSynthetic;
  bool depth_available = false;
  // Disparity range covered by the 16-bit depth images.
  double depth_min = 0.0;
  double depth_max = 0.0;
  // Positions of the stored views on the dense angular grid. Empty means
  // 0..angular_count-1; filled in by subsample_angular.
  std::vector<double> view_positions;

  bool operator==(const Manifest&) const = default;
};

// Horizontal-parallax light field: views[w] is the image seen from camera
// position w on the baseline.
struct LightField {
  Manifest manifest;
  std::vector<Image> views;

  int view_count() const { return static_cast<int>(views.size()); }
  int width() const { return views.empty() ? 0 : views.front().width; }
  int height() const { return views.empty() ? 0 : views.front().height; }

  bool operator==(const LightField&) const = default;
};

// Per-view disparity in pixels per angular step; positive is in front of the
// convergence plane.
struct DepthMap {
  std::vector<Plane> views;

  bool operator==(const DepthMap&) const = default;
};

// Epipolar-plane image at a fixed row: height = view count, width = W.
using Epi = Image;

// Throws if views disagree in size, the manifest disagrees with the views, or
// samples leave [0,1].
void validate(const LightField& lf);

// Angular positions of the stored views (manifest.view_positions or 0..V-1).
std::vector<double> view_positions(const LightField& lf);

// Builds a manifest describing `views` with defaults for everything else.
Manifest make_manifest(const std::string& name, const std::vector<Image>& views,
                       double max_step_disparity);

Epi extract_epi(const LightField& lf, int row);

// Indices kept by subsampling V views with step k; V-1 is always kept.
std::vector<int> subsample_indices(int view_count, int k);

LightField subsample_angular(const LightField& lf, int k);
DepthMap subsample_angular(const DepthMap& depth, int k);

}  // namespace lfqa
