#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "filter.hpp"
#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/metrics.hpp"

namespace lfqa {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 8> kMetricNames = {
    "PSNR", "SSIM2D", "SSIM2Dx1D", "SSIM3D", "MSSSIM", "GMSD", "MPPSNR", "SWIM3D"};

constexpr double kInf = std::numeric_limits<double>::infinity();

double psnr_from_mse(double mse) { return mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : kInf; }

// Mean over finite views; all-infinite pools to +inf with the unbounded flag.
MetricScore pool(MetricId id, std::vector<double> per_view) {
  MetricScore score;
  score.id = id;
  double sum = 0.0;
  int finite = 0;
  for (double v : per_view) {
    if (std::isfinite(v)) {
      sum += v;
      ++finite;
    }
  }
  score.unbounded = finite == 0;
  score.pooled = finite == 0 ? kInf : sum / finite;
  score.per_view = std::move(per_view);
  return score;
}

double clamped(const Plane& p, int y, int x) {
  y = std::clamp(y, 0, p.height - 1);
  x = std::clamp(x, 0, p.width - 1);
  return p(y, x);
}

// Flat square structuring element anchored at the top-left for erosion and
// reflected for dilation, so that dilate is the adjoint of erode.
Plane erode(const Plane& p, int se) {
  if (se <= 1) return p;
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double v = kInf;
      for (int dy = 0; dy < se; ++dy) {
        for (int dx = 0; dx < se; ++dx) v = std::min(v, clamped(p, y + dy, x + dx));
      }
      out(y, x) = v;
    }
  }
  return out;
}

Plane dilate(const Plane& p, int se) {
  if (se <= 1) return p;
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double v = -kInf;
      for (int dy = 0; dy < se; ++dy) {
        for (int dx = 0; dx < se; ++dx) v = std::max(v, clamped(p, y - dy, x - dx));
      }
      out(y, x) = v;
    }
  }
  return out;
}

Plane reduce(const Plane& p, int se) {
  const Plane e = erode(p, se);
  Plane out((p.width + 1) / 2, (p.height + 1) / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out(y, x) = e(2 * y, 2 * x);
  }
  return out;
}

Plane expand(const Plane& p, int width, int height, int se) {
  Plane up(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) up(y, x) = p(y / 2, x / 2);
  }
  return dilate(up, se);
}

double plane_mse(const Plane& a, const Plane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s / static_cast<double>(a.data.size());
}

Plane block_of(const Plane& p, int y0, int x0, int size) {
  Plane out(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) out(y, x) = p(y0 + y, x0 + x);
  }
  return out;
}

std::vector<double> haar_histogram(const Plane& p, int bins) {
  std::vector<double> hist(bins, 0.0);
  const int h = p.height / 2;
  const int w = p.width / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double detail = 0.5 * (p(2 * y, 2 * x) + p(2 * y, 2 * x + 1) -
                                   p(2 * y + 1, 2 * x) - p(2 * y + 1, 2 * x + 1));
      const int bin = std::clamp(static_cast<int>(std::floor((detail + 0.5) * bins)), 0,
                                 bins - 1);
      hist[bin] += 1.0;
    }
  }
  for (double& v : hist) v /= static_cast<double>(h * w);
  return hist;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

const char* metric_name(MetricId id) { return kMetricNames[static_cast<int>(id)]; }

MetricId metric_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (name == kMetricNames[i]) return static_cast<MetricId>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::vector<MetricId> all_metrics() {
  std::vector<MetricId> ids;
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) ids.push_back(static_cast<MetricId>(i));
  return ids;
}

bool higher_is_better(MetricId id) { return id != MetricId::kGmsd; }

void validate(const MetricConfig& cfg) {
  require(cfg.ssim_window >= 3 && cfg.ssim_window % 2 == 1, "ssim_window must be odd and >= 3");
  require(cfg.ssim_sigma > 0.0, "ssim_sigma must be positive");
  require(cfg.angular_window_1d >= 1 && cfg.angular_window_3d >= 1,
          "angular windows must be >= 1");
  require(cfg.gmsd_c > 0.0, "gmsd_c must be positive");
  require(!cfg.msssim_weights.empty(), "msssim_weights must not be empty");
  for (double w : cfg.msssim_weights) require(w > 0.0, "msssim_weights must be positive");
  require(cfg.mp_levels >= 1, "mp_levels must be >= 1");
  require(cfg.mp_top_levels >= 1 && cfg.mp_top_levels <= cfg.mp_levels,
          "mp_top_levels must lie in 1..mp_levels");
  require(cfg.mp_se_size >= 1, "mp_se_size must be >= 1");
  require(cfg.swim_block >= 2 && cfg.swim_block % 2 == 0, "swim_block must be even and >= 2");
  require(cfg.swim_bins >= 2, "swim_bins must be >= 2");
  require(cfg.swim_search >= 0, "swim_search must be >= 0");
}

std::string metric_config_to_json(const MetricConfig& cfg) {
  const json j = {{"ssim_window", cfg.ssim_window},
                  {"ssim_sigma", cfg.ssim_sigma},
                  {"angular_window_1d", cfg.angular_window_1d},
                  {"angular_window_3d", cfg.angular_window_3d},
                  {"gmsd_c", cfg.gmsd_c},
                  {"msssim_weights", cfg.msssim_weights},
                  {"mp_levels", cfg.mp_levels},
                  {"mp_top_levels", cfg.mp_top_levels},
                  {"mp_se_size", cfg.mp_se_size},
                  {"swim_block", cfg.swim_block},
                  {"swim_bins", cfg.swim_bins},
                  {"swim_search", cfg.swim_search}};
  return j.dump(2);
}

MetricConfig metric_config_from_json(const std::string& text) {
  MetricConfig cfg;
  try {
    const json j = json::parse(text);
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    read("ssim_window", cfg.ssim_window);
    read("ssim_sigma", cfg.ssim_sigma);
    read("angular_window_1d", cfg.angular_window_1d);
    read("angular_window_3d", cfg.angular_window_3d);
    read("gmsd_c", cfg.gmsd_c);
    read("msssim_weights", cfg.msssim_weights);
    read("mp_levels", cfg.mp_levels);
    read("mp_top_levels", cfg.mp_top_levels);
    read("mp_se_size", cfg.mp_se_size);
    read("swim_block", cfg.swim_block);
    read("swim_bins", cfg.swim_bins);
    read("swim_search", cfg.swim_search);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("metric config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

namespace image_metrics {

double gmsd(const Plane& a, const Plane& b, double c) {
  // 2x2 box average then decimation by two.
  auto downsample = [](const Plane& p) {
    Plane out((p.width + 1) / 2, (p.height + 1) / 2);
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        double s = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int sy = 2 * y + dy;
            const int sx = 2 * x + dx;
            if (sy < p.height && sx < p.width) s += p(sy, sx);
          }
        }
        out(y, x) = 0.25 * s;
      }
    }
    return out;
  };
  // Prewitt magnitude with zero padding.
  auto magnitude = [](const Plane& p) {
    auto at = [&](int y, int x) {
      return (y >= 0 && y < p.height && x >= 0 && x < p.width) ? p(y, x) : 0.0;
    };
    Plane out(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        double gx = 0.0;
        double gy = 0.0;
        for (int d = -1; d <= 1; ++d) {
          gx += at(y + d, x - 1) - at(y + d, x + 1);
          gy += at(y - 1, x + d) - at(y + 1, x + d);
        }
        out(y, x) = std::sqrt(gx * gx + gy * gy) / 3.0;
      }
    }
    return out;
  };
  const Plane ma = magnitude(downsample(a));
  const Plane mb = magnitude(downsample(b));
  const std::size_t n = ma.data.size();
  std::vector<double> gms(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ra = ma.data[i];
    const double rb = mb.data[i];
    gms[i] = (2.0 * ra * rb + c) / (ra * ra + rb * rb + c);
    mean += gms[i];
  }
  mean /= static_cast<double>(n);
  if (n < 2) return 0.0;
  double var = 0.0;
  for (double g : gms) var += (g - mean) * (g - mean);
  return std::sqrt(var / static_cast<double>(n - 1));
}

double mp_mse(const Plane& a, const Plane& b, const MetricConfig& cfg, std::string* note) {
  int levels = cfg.mp_levels;
  while (levels > 1 && std::min(a.width, a.height) < (1 << (levels - 1))) --levels;
  if (levels < cfg.mp_levels && note != nullptr) {
    *note = "mp_psnr reduced to " + std::to_string(levels) + " levels";
  }
  const int top = std::min(cfg.mp_top_levels, levels);
  std::vector<Plane> pa = {a};
  std::vector<Plane> pb = {b};
  for (int l = 1; l < levels; ++l) {
    pa.push_back(reduce(pa.back(), cfg.mp_se_size));
    pb.push_back(reduce(pb.back(), cfg.mp_se_size));
  }
  double total = 0.0;
  for (int l = levels - top; l < levels; ++l) {
    if (l == levels - 1) {
      total += plane_mse(pa[l], pb[l]);
      continue;
    }
    auto detail = [&](const std::vector<Plane>& pyr) {
      Plane d = pyr[l];
      const Plane e = expand(pyr[l + 1], d.width, d.height, cfg.mp_se_size);
      for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= e.data[i];
      return d;
    };
    total += plane_mse(detail(pa), detail(pb));
  }
  return total / top;
}

double haar_ks_distance(const Plane& a, const Plane& b, int bins) {
  const std::vector<double> ha = haar_histogram(a, bins);
  const std::vector<double> hb = haar_histogram(b, bins);
  double ca = 0.0;
  double cb = 0.0;
  double worst = 0.0;
  for (int i = 0; i < bins; ++i) {
    ca += ha[i];
    cb += hb[i];
    worst = std::max(worst, std::abs(ca - cb));
  }
  return worst;
}

std::vector<double> swim_block_distances(const Plane& a, const Plane& b,
                                         const MetricConfig& cfg) {
  const int size = cfg.swim_block;
  if (a.width < size || a.height < size) {
    throw Error(ErrorCode::kInvalidArgument, "image smaller than one 3DSwIM block");
  }
  std::vector<double> out;
  for (int y0 = 0; y0 + size <= a.height; y0 += size) {
    for (int x0 = 0; x0 + size <= a.width; x0 += size) {
      const Plane tb = block_of(b, y0, x0, size);
      int best_shift = 0;
      double best_sad = kInf;
      for (int s = 0; s <= cfg.swim_search; ++s) {
        for (int sign : {1, -1}) {
          const int rx = x0 + sign * s;
          if (rx < 0 || rx + size > a.width || (s == 0 && sign < 0)) continue;
          double sad = 0.0;
          for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) sad += std::abs(a(y0 + y, rx + x) - tb(y, x));
          }
          if (sad < best_sad) {
            best_sad = sad;
            best_shift = sign * s;
          }
        }
      }
      out.push_back(haar_ks_distance(block_of(a, y0, x0 + best_shift, size), tb,
                                     cfg.swim_bins));
    }
  }
  return out;
}

}  // namespace image_metrics

MetricScore psnr(const LightField& ref, const LightField& test) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  for (int w = 0; w < ref.view_count(); ++w) {
    const auto& ra = ref.views[w].data;
    const auto& ta = test.views[w].data;
    double s = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) s += (ra[i] - ta[i]) * (ra[i] - ta[i]);
    per_view.push_back(psnr_from_mse(s / static_cast<double>(ra.size())));
  }
  return pool(MetricId::kPsnr, std::move(per_view));
}

MetricScore gmsd(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  for (int w = 0; w < ref.view_count(); ++w) {
    per_view.push_back(image_metrics::gmsd(luma(ref.views[w]), luma(test.views[w]), cfg.gmsd_c));
  }
  return pool(MetricId::kGmsd, std::move(per_view));
}

MetricScore mp_psnr(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  std::string note;
  for (int w = 0; w < ref.view_count(); ++w) {
    per_view.push_back(psnr_from_mse(
        image_metrics::mp_mse(luma(ref.views[w]), luma(test.views[w]), cfg, &note)));
  }
  MetricScore score = pool(MetricId::kMpPsnr, std::move(per_view));
  score.note = note;
  return score;
}

MetricScore swim3d(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  for (int w = 0; w < ref.view_count(); ++w) {
    const std::vector<double> ks =
        image_metrics::swim_block_distances(luma(ref.views[w]), luma(test.views[w]), cfg);
    double sum = 0.0;
    for (double d : ks) sum += d;
    per_view.push_back(1.0 - sum / static_cast<double>(ks.size()));
  }
  return pool(MetricId::kSwim3d, std::move(per_view));
}

MetricScore compute_metric(MetricId id, const LightField& ref, const LightField& test,
                           const MetricConfig& cfg) {
  switch (id) {
    case MetricId::kPsnr: return psnr(ref, test);
    case MetricId::kSsim2d: return ssim2d(ref, test, cfg);
    case MetricId::kSsim2dx1d: return ssim_2dx1d(ref, test, cfg);
    case MetricId::kSsim3d: return ssim3d(ref, test, cfg);
    case MetricId::kMsssim: return msssim(ref, test, cfg);
    case MetricId::kGmsd: return gmsd(ref, test, cfg);
    case MetricId::kMpPsnr: return mp_psnr(ref, test, cfg);
    case MetricId::kSwim3d: return swim3d(ref, test, cfg);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric id");
}

std::vector<MetricScore> run_battery(const LightField& ref, const LightField& test,
                                     const MetricConfig& cfg,
                                     const std::vector<MetricId>& ids) {
  validate(cfg);
  if (!ids.empty()) detail::check_same_shape(ref, test);
  std::vector<MetricScore> out;
  out.reserve(ids.size());
  for (MetricId id : ids) out.push_back(compute_metric(id, ref, test, cfg));
  return out;
}

}  // namespace lfqa
