#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/image.hpp"
#include "lfqa/light_field.hpp"

namespace lfqa {

enum class DistortionKind { kNN, kLinear, kOpt, kDQ, kGauss, kExternal };

const char* kind_name(DistortionKind kind);
DistortionKind kind_from_name(std::string_view name);

// Angular subsampling factor for severity levels 1..6.
inline constexpr std::array<int, 6> kSubsamplingLadder = {2, 5, 8, 11, 18, 25};
// Quantization parameters of the externally coded (HEVC) levels; recorded only.
inline constexpr std::array<int, 6> kHevcQpLadder = {25, 29, 33, 37, 41, 45};

int k_for_level(int level);

struct DistortionSpec {
  DistortionKind kind = DistortionKind::kNN;
  int level = 1;
  // Angular subsampling factor; 0 means "take it from the level ladder".
  int k = 0;
  int quantization_levels = 8;
  double sigma_views = 0.5;

  int effective_k() const { return k > 0 ? k : k_for_level(level); }

  bool operator==(const DistortionSpec&) const = default;
};

std::string distortion_spec_to_json(const DistortionSpec& spec);
DistortionSpec distortion_spec_from_json(const std::string& text);

// Copies the nearest sample view; midpoint ties go to the lower index.
LightField reconstruct_nn(const LightField& sparse, int target_views);

// Blends the two flanking sample views with weights (1-t, t).
LightField reconstruct_linear(const LightField& sparse, int target_views);

struct BlockMatchOptions {
  int block = 8;
  // Search covers shifts in [-max_disparity, max_disparity].
  int max_disparity = 16;
  // Blocks whose luma standard deviation falls below this are untextured.
  double min_texture_std = 2e-3;
};

struct DisparityField {
  // a(y, x) ~ b(y, x + disparity(y, x))
  Plane disparity;
  // 0 where the block was untextured (disparity forced to 0).
  std::vector<std::uint8_t> confident;
};

// Horizontal block matching with parabolic sub-pixel refinement.
DisparityField estimate_disparity(const Image& view_a, const Image& view_b,
                                  const BlockMatchOptions& options);

// Left-right check: pixels of `ab` whose match in `ba` does not point back
// within `tolerance` (or lands outside the image, or is untextured) lose their
// confidence and take the disparity of the nearest confident pixel on the row,
// preferring the farther one. `far_sign` is +1 when smaller disparities are
// farther, -1 otherwise.
void cross_check(DisparityField& ab, const DisparityField& ba, double tolerance,
                 double far_sign);

// Disparity-compensated interpolation: both flanking views are forward-warped
// to the target position, z-ordered, cross-filled and blended.
LightField reconstruct_opt(const LightField& sparse, int target_views);

// Uniform quantizer with `levels` reconstruction values spanning the global
// disparity range (both extremes are representable).
DepthMap quantize_depth(const DepthMap& depth, int levels);

// Re-renders every view by warping the central view with quantized disparity.
LightField distort_dq(const LightField& lf, const DepthMap& depth, int levels);

// Same warp, but every view is synthesized from its flanking views after
// angular subsampling by k.
LightField distort_dq_sampled(const LightField& lf, const DepthMap& depth,
                              int levels, int k);

// Normalized Gaussian crosstalk weights of the display views seen at
// `position`.
std::vector<double> crosstalk_weights(std::span<const double> display_positions,
                                      double position, double sigma);

// Hypothetical display with views every k positions, upsampled back to the
// dense grid through a Gaussian crosstalk model with sigma = sigma_views * k.
LightField distort_gauss(const LightField& lf, int k, double sigma_views);

// Dispatches on spec.kind; output has the input's view count and size.
LightField apply(const DistortionSpec& spec, const LightField& lf,
                 const DepthMap* depth);

}  // namespace lfqa
