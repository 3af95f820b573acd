#pragma once

#include <vector>

#include "lfqa/image.hpp"
#include "lfqa/light_field.hpp"

namespace lfqa::detail {

// Normalized 1-D Gaussian of odd length `window`.
std::vector<double> gaussian_kernel(int window, double sigma);

// Separable correlation keeping only positions where the kernel fits
// ("valid" mode); the result shrinks by window-1 in each direction.
Plane filter_valid(const Plane& p, const std::vector<double>& kernel);

Plane multiply(const Plane& a, const Plane& b);

// Filtered first and second moments of a pair of planes.
struct Moments {
  Plane mx, my, mxx, myy, mxy;
};
Moments moments(const Plane& a, const Plane& b, const std::vector<double>& kernel);

// SSIM index and its contrast-structure factor for one set of statistics.
struct SsimTerms {
  double ssim;
  double cs;
};
inline SsimTerms ssim_terms(double mx, double my, double sxx, double syy, double sxy) {
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  const double cs = (2.0 * sxy + kC2) / (sxx + syy + kC2);
  const double l = (2.0 * mx * my + kC1) / (mx * mx + my * my + kC1);
  return {l * cs, cs};
}

void check_same_shape(const LightField& ref, const LightField& test);

}  // namespace lfqa::detail
