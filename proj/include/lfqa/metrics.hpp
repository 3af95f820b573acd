#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lfqa/light_field.hpp"

namespace lfqa {

enum class MetricId { kPsnr, kSsim2d, kSsim2dx1d, kSsim3d, kMsssim, kGmsd, kMpPsnr, kSwim3d };

const char* metric_name(MetricId id);
MetricId metric_from_name(std::string_view name);
std::vector<MetricId> all_metrics();

// GMSD is a distance; every other metric grows with quality.
bool higher_is_better(MetricId id);

struct MetricScore {
  MetricId id = MetricId::kPsnr;
  // One entry per view (per angular slice for the volumetric metrics). PSNR
  // family views with zero error hold +inf and are left out of `pooled`.
  std::vector<double> per_view;
  double pooled = 0.0;
  // Every view had zero error; `pooled` is +inf.
  bool unbounded = false;
  // Set when the metric had to shrink its scale count for a small image.
  std::string note;
};

struct MetricConfig {
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  int angular_window_1d = 32;
  int angular_window_3d = 64;
  double gmsd_c = 170.0 / (255.0 * 255.0);
  std::vector<double> msssim_weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int mp_levels = 5;
  int mp_top_levels = 2;
  // Side of the square structuring element; 1 turns the morphology off.
  int mp_se_size = 2;
  int swim_block = 16;
  int swim_bins = 32;
  int swim_search = 8;
};

// Throws kInvalidArgument on out-of-range settings.
void validate(const MetricConfig& cfg);
std::string metric_config_to_json(const MetricConfig& cfg);
MetricConfig metric_config_from_json(const std::string& text);

MetricScore psnr(const LightField& ref, const LightField& test);
MetricScore ssim2d(const LightField& ref, const LightField& test, const MetricConfig& cfg);
// Spatial Gaussian window plus a 1-D run of the same pixel across neighboring
// views; the angular samples carry the window's center weight.
MetricScore ssim_2dx1d(const LightField& ref, const LightField& test,
                       const MetricConfig& cfg);
// Gaussian spatial window times a uniform angular window, shifted to stay
// inside the view range.
MetricScore ssim3d(const LightField& ref, const LightField& test, const MetricConfig& cfg);
MetricScore msssim(const LightField& ref, const LightField& test, const MetricConfig& cfg);
MetricScore gmsd(const LightField& ref, const LightField& test, const MetricConfig& cfg);
MetricScore mp_psnr(const LightField& ref, const LightField& test, const MetricConfig& cfg);
MetricScore swim3d(const LightField& ref, const LightField& test, const MetricConfig& cfg);

MetricScore compute_metric(MetricId id, const LightField& ref, const LightField& test,
                           const MetricConfig& cfg);
std::vector<MetricScore> run_battery(const LightField& ref, const LightField& test,
                                     const MetricConfig& cfg,
                                     const std::vector<MetricId>& ids);

// Single-image building blocks, exposed for testing.
namespace image_metrics {

// Mean SSIM and mean contrast-structure term over the valid window positions.
struct SsimResult {
  double ssim = 0.0;
  double cs = 0.0;
};
SsimResult ssim(const Plane& a, const Plane& b, int window, double sigma);
double msssim(const Plane& a, const Plane& b, const MetricConfig& cfg, std::string* note);
double gmsd(const Plane& a, const Plane& b, double c);
// Returns the pooled band MSE.
double mp_mse(const Plane& a, const Plane& b, const MetricConfig& cfg, std::string* note);
// Per-block KS distances in raster block order.
std::vector<double> swim_block_distances(const Plane& a, const Plane& b,
                                         const MetricConfig& cfg);
// Kolmogorov-Smirnov distance of the horizontal Haar detail histograms of two
// equally sized blocks.
double haar_ks_distance(const Plane& a, const Plane& b, int bins);

}  // namespace image_metrics

}  // namespace lfqa
