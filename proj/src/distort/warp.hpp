#pragma once

#include <cstdint>
#include <vector>

#include "lfqa/image.hpp"

namespace lfqa::detail {

// Result of forward splatting one view. `z` orders competing samples (larger
// is nearer); `valid` marks pixels that received a sample.
struct Splat {
  Image image;
  Plane z;
  std::vector<std::uint8_t> valid;
};

// Splats pixel (y, x) linearly onto the two pixels around
// x + scale * disparity(y, x). Each target keeps only the nearest layer:
// samples whose z = z_sign * disparity is within z_tolerance of the largest z
// seen there are averaged by splat weight, farther ones are dropped.
Splat forward_warp(const Image& source, const Plane& disparity, double scale,
                   double z_sign, double z_tolerance = 0.25);

// Fills invalid pixels from the nearest valid pixel on the same row; at equal
// distance the farther (smaller z) neighbor wins.
void fill_holes(Splat& splat);

// (1-t) * a + t * b where both are valid and agree in z (within
// z_tolerance), the nearer sample where they disagree, the valid one where only
// one is, and nearest-neighbor fill where neither is.
Image blend_splats(const Splat& a, const Splat& b, double t, double z_tolerance);

}  // namespace lfqa::detail
