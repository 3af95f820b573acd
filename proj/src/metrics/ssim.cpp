#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "filter.hpp"
#include "lfqa/error.hpp"
#include "lfqa/metrics.hpp"

namespace lfqa {

namespace detail {

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(window);
  const int r = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    k[i] = std::exp(-0.5 * (i - r) * (i - r) / (sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

Plane filter_valid(const Plane& p, const std::vector<double>& kernel) {
  const int n = static_cast<int>(kernel.size());
  const int w = p.width - n + 1;
  const int h = p.height - n + 1;
  if (w < 1 || h < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "image " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                    " is smaller than the " + std::to_string(n) + "-pixel window");
  }
  Plane rows(w, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += kernel[i] * p(y, x + i);
      rows(y, x) = s;
    }
  }
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += kernel[i] * rows(y + i, x);
      out(y, x) = s;
    }
  }
  return out;
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out(a.width, a.height);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

Moments moments(const Plane& a, const Plane& b, const std::vector<double>& kernel) {
  return {filter_valid(a, kernel), filter_valid(b, kernel),
          filter_valid(multiply(a, a), kernel), filter_valid(multiply(b, b), kernel),
          filter_valid(multiply(a, b), kernel)};
}

void check_same_shape(const LightField& ref, const LightField& test) {
  if (ref.view_count() != test.view_count() || ref.width() != test.width() ||
      ref.height() != test.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "reference and test light fields differ in shape");
  }
  if (ref.view_count() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "light field has no views");
  }
}

}  // namespace detail

namespace {

using detail::Moments;
using detail::ssim_terms;

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

MetricScore make_score(MetricId id, std::vector<double> per_view) {
  MetricScore score;
  score.id = id;
  score.pooled = mean(per_view);
  score.per_view = std::move(per_view);
  return score;
}

std::vector<Plane> lumas(const LightField& lf) {
  std::vector<Plane> out;
  out.reserve(lf.views.size());
  for (const Image& v : lf.views) out.push_back(luma(v));
  return out;
}

// Running sums of five moment planes over a sliding range of views.
struct MomentSums {
  Plane x, y, xx, yy, xy;

  MomentSums(int w, int h) : x(w, h), y(w, h), xx(w, h), yy(w, h), xy(w, h) {}

  void add(const Moments& m, double sign) {
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] += sign * m.mx.data[i];
      y.data[i] += sign * m.my.data[i];
      xx.data[i] += sign * m.mxx.data[i];
      yy.data[i] += sign * m.myy.data[i];
      xy.data[i] += sign * m.mxy.data[i];
    }
  }
};

// Unfiltered samples at the centers of the valid window positions.
Moments center_samples(const Plane& a, const Plane& b, int radius) {
  const int w = a.width - 2 * radius;
  const int h = a.height - 2 * radius;
  Moments m{Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double va = a(y + radius, x + radius);
      const double vb = b(y + radius, x + radius);
      m.mx(y, x) = va;
      m.my(y, x) = vb;
      m.mxx(y, x) = va * va;
      m.myy(y, x) = vb * vb;
      m.mxy(y, x) = va * vb;
    }
  }
  return m;
}

// First view of a window of `length` views centered on `w`, kept in range.
int window_start(int w, int length, int views) {
  return std::clamp(w - length / 2, 0, views - length);
}

}  // namespace

namespace image_metrics {

SsimResult ssim(const Plane& a, const Plane& b, int window, double sigma) {
  const Moments m = detail::moments(a, b, detail::gaussian_kernel(window, sigma));
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < m.mx.data.size(); ++i) {
    const double mx = m.mx.data[i];
    const double my = m.my.data[i];
    const auto t = ssim_terms(mx, my, m.mxx.data[i] - mx * mx, m.myy.data[i] - my * my,
                              m.mxy.data[i] - mx * my);
    s += t.ssim;
    c += t.cs;
  }
  const auto n = static_cast<double>(m.mx.data.size());
  return {s / n, c / n};
}

namespace {

// 2x2 average pooling, stride 2, zero padding of one pixel on both sides of
// an odd dimension, padded zeros counted in the average.
Plane avg_pool2(const Plane& p) {
  const int pad_x = p.width % 2;
  const int pad_y = p.height % 2;
  const int w = (p.width + 2 * pad_x - 2) / 2 + 1;
  const int h = (p.height + 2 * pad_y - 2) / 2 + 1;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sy = 2 * y + dy - pad_y;
          const int sx = 2 * x + dx - pad_x;
          if (sy >= 0 && sy < p.height && sx >= 0 && sx < p.width) s += p(sy, sx);
        }
      }
      out(y, x) = 0.25 * s;
    }
  }
  return out;
}

}  // namespace

double msssim(const Plane& a, const Plane& b, const MetricConfig& cfg, std::string* note) {
  const int smallest = std::min(a.width, a.height);
  int scales = static_cast<int>(cfg.msssim_weights.size());
  while (scales > 0 && smallest < (1 << (scales - 1)) * cfg.ssim_window) --scales;
  if (scales == 0) {
    throw Error(ErrorCode::kInvalidArgument, "image too small for MS-SSIM");
  }
  std::vector<double> weights(cfg.msssim_weights.begin(),
                              cfg.msssim_weights.begin() + scales);
  if (scales < static_cast<int>(cfg.msssim_weights.size())) {
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    if (note != nullptr) *note = "msssim reduced to " + std::to_string(scales) + " scales";
  }
  Plane x = a;
  Plane y = b;
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const SsimResult r = ssim(x, y, cfg.ssim_window, cfg.ssim_sigma);
    if (s + 1 < scales) {
      result *= std::pow(std::max(r.cs, 0.0), weights[s]);
      x = avg_pool2(x);
      y = avg_pool2(y);
    } else {
      result *= std::pow(std::max(r.ssim, 0.0), weights[s]);
    }
  }
  return result;
}

}  // namespace image_metrics

MetricScore ssim2d(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  for (int w = 0; w < ref.view_count(); ++w) {
    per_view.push_back(image_metrics::ssim(luma(ref.views[w]), luma(test.views[w]),
                                           cfg.ssim_window, cfg.ssim_sigma)
                           .ssim);
  }
  return make_score(MetricId::kSsim2d, std::move(per_view));
}

MetricScore ssim_2dx1d(const LightField& ref, const LightField& test,
                       const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  const int views = ref.view_count();
  const int length = std::clamp(cfg.angular_window_1d, 1, views);
  const int radius = cfg.ssim_window / 2;
  const std::vector<double> kernel = detail::gaussian_kernel(cfg.ssim_window, cfg.ssim_sigma);
  const double center_weight = kernel[radius] * kernel[radius];
  const std::vector<Plane> ra = lumas(ref);
  const std::vector<Plane> ta = lumas(test);

  const int vw = ref.width() - 2 * radius;
  const int vh = ref.height() - 2 * radius;
  MomentSums angular(std::max(vw, 0), std::max(vh, 0));
  int lo = 0;
  int hi = 0;  // angular holds views [lo, hi)
  std::vector<double> per_view;
  for (int w = 0; w < views; ++w) {
    const Moments spatial = detail::moments(ra[w], ta[w], kernel);
    const int start = window_start(w, length, views);
    for (; hi < start + length; ++hi) angular.add(center_samples(ra[hi], ta[hi], radius), 1.0);
    for (; lo < start; ++lo) angular.add(center_samples(ra[lo], ta[lo], radius), -1.0);
    // The view's own pixel already sits at the center of the spatial window.
    const Moments own = center_samples(ra[w], ta[w], radius);
    const double extra = length - 1;
    const double norm = 1.0 + extra * center_weight;
    double sum = 0.0;
    for (std::size_t i = 0; i < spatial.mx.data.size(); ++i) {
      auto pooled = [&](const Plane& s, const Plane& a, const Plane& o) {
        return (s.data[i] + center_weight * (a.data[i] - o.data[i])) / norm;
      };
      const double mx = pooled(spatial.mx, angular.x, own.mx);
      const double my = pooled(spatial.my, angular.y, own.my);
      const double exx = pooled(spatial.mxx, angular.xx, own.mxx);
      const double eyy = pooled(spatial.myy, angular.yy, own.myy);
      const double exy = pooled(spatial.mxy, angular.xy, own.mxy);
      sum += ssim_terms(mx, my, exx - mx * mx, eyy - my * my, exy - mx * my).ssim;
    }
    per_view.push_back(sum / static_cast<double>(spatial.mx.data.size()));
  }
  return make_score(MetricId::kSsim2dx1d, std::move(per_view));
}

MetricScore ssim3d(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  const int views = ref.view_count();
  const int length = std::clamp(cfg.angular_window_3d, 1, views);
  const std::vector<double> kernel = detail::gaussian_kernel(cfg.ssim_window, cfg.ssim_sigma);
  const std::vector<Plane> ra = lumas(ref);
  const std::vector<Plane> ta = lumas(test);
  auto slice = [&](int w) { return detail::moments(ra[w], ta[w], kernel); };

  std::vector<double> per_view;
  std::unique_ptr<MomentSums> sums;
  int lo = 0;
  int hi = 0;
  for (int w = 0; w < views; ++w) {
    const int start = window_start(w, length, views);
    while (hi < start + length) {
      const Moments m = slice(hi++);
      if (!sums) sums = std::make_unique<MomentSums>(m.mx.width, m.mx.height);
      sums->add(m, 1.0);
    }
    while (lo < start) sums->add(slice(lo++), -1.0);
    const double inv = 1.0 / length;
    double sum = 0.0;
    for (std::size_t i = 0; i < sums->x.data.size(); ++i) {
      const double mx = sums->x.data[i] * inv;
      const double my = sums->y.data[i] * inv;
      sum += ssim_terms(mx, my, sums->xx.data[i] * inv - mx * mx,
                        sums->yy.data[i] * inv - my * my, sums->xy.data[i] * inv - mx * my)
                 .ssim;
    }
    per_view.push_back(sum / static_cast<double>(sums->x.data.size()));
  }
  return make_score(MetricId::kSsim3d, std::move(per_view));
}

MetricScore msssim(const LightField& ref, const LightField& test, const MetricConfig& cfg) {
  detail::check_same_shape(ref, test);
  std::vector<double> per_view;
  std::string note;
  for (int w = 0; w < ref.view_count(); ++w) {
    per_view.push_back(
        image_metrics::msssim(luma(ref.views[w]), luma(test.views[w]), cfg, &note));
  }
  MetricScore score = make_score(MetricId::kMsssim, std::move(per_view));
  score.note = note;
  return score;
}

}  // namespace lfqa
