#include "lfqa/distort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "lfqa/error.hpp"
#include "warp.hpp"

namespace lfqa {

using nlohmann::json;

const char* kind_name(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::kNN: return "NN";
    case DistortionKind::kLinear: return "LINEAR";
    case DistortionKind::kOpt: return "OPT";
    case DistortionKind::kDQ: return "DQ";
    case DistortionKind::kGauss: return "GAUSS";
    case DistortionKind::kExternal: return "EXTERNAL";
  }
  return "?";
}

DistortionKind kind_from_name(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (DistortionKind kind :
       {DistortionKind::kNN, DistortionKind::kLinear, DistortionKind::kOpt,
        DistortionKind::kDQ, DistortionKind::kGauss, DistortionKind::kExternal}) {
    if (upper == kind_name(kind)) return kind;
  }
  if (upper == "HEVC") return DistortionKind::kExternal;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown distortion kind '" + std::string(name) + "'");
}

int k_for_level(int level) {
  if (level < 1 || level > static_cast<int>(kSubsamplingLadder.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                "severity level must be in 1..6, got " + std::to_string(level));
  }
  return kSubsamplingLadder[level - 1];
}

std::string distortion_spec_to_json(const DistortionSpec& spec) {
  json j = {{"kind", kind_name(spec.kind)},
            {"level", spec.level},
            {"k", spec.effective_k()},
            {"quantization_levels", spec.quantization_levels},
            {"sigma_views", spec.sigma_views}};
  return j.dump();
}

DistortionSpec distortion_spec_from_json(const std::string& text) {
  DistortionSpec spec;
  try {
    const json j = json::parse(text);
    spec.kind = kind_from_name(j.at("kind").get<std::string>());
    spec.level = j.value("level", 1);
    spec.k = j.value("k", 0);
    spec.quantization_levels = j.value("quantization_levels", 8);
    spec.sigma_views = j.value("sigma_views", 0.5);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad distortion spec: ") + e.what());
  }
  if (spec.k < 0 || (spec.k == 0 && (spec.level < 1 || spec.level > 6))) {
    throw Error(ErrorCode::kInvalidArgument, "distortion spec needs k or a level in 1..6");
  }
  return spec;
}

namespace {

// Positions of the sparse views on the target grid 0..target_views-1.
std::vector<double> sample_positions(const LightField& sparse, int target_views) {
  const std::vector<double>& stored = sparse.manifest.view_positions;
  if (!stored.empty() && static_cast<int>(stored.size()) == sparse.view_count() &&
      stored.front() == 0.0 && stored.back() == target_views - 1.0) {
    return stored;
  }
  std::vector<double> positions(sparse.views.size(), 0.0);
  if (sparse.view_count() > 1) {
    const double step = (target_views - 1.0) / (sparse.view_count() - 1);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      positions[i] = static_cast<double>(i) * step;
    }
    positions.back() = target_views - 1.0;
  }
  return positions;
}

void check_reconstruct_args(const LightField& sparse, int target_views,
                            int min_views) {
  if (sparse.view_count() < min_views) {
    throw Error(ErrorCode::kInvalidArgument,
                "reconstruction needs at least " + std::to_string(min_views) +
                    " sample views");
  }
  if (target_views < sparse.view_count()) {
    throw Error(ErrorCode::kInvalidArgument,
                "target view count is smaller than the sample count");
  }
}

LightField dense_output(const LightField& sparse, int target_views) {
  LightField out;
  out.manifest = sparse.manifest;
  out.manifest.angular_count = target_views;
  out.manifest.view_positions.clear();
  out.views.reserve(target_views);
  return out;
}

// Index i with positions[i] <= p <= positions[i+1]; positions.size() >= 2.
std::size_t segment_for(const std::vector<double>& positions, double p) {
  auto it = std::upper_bound(positions.begin(), positions.end(), p);
  std::size_t i = it == positions.begin() ? 0 : static_cast<std::size_t>(it - positions.begin()) - 1;
  return std::min(i, positions.size() - 2);
}

Image mix(const Image& a, const Image& b, double t) {
  Image out(a.width, a.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = (1.0 - t) * a.data[i] + t * b.data[i];
  }
  return out;
}

}  // namespace

LightField reconstruct_nn(const LightField& sparse, int target_views) {
  check_reconstruct_args(sparse, target_views, 1);
  const std::vector<double> positions = sample_positions(sparse, target_views);
  LightField out = dense_output(sparse, target_views);
  for (int w = 0; w < target_views; ++w) {
    std::size_t nearest = 0;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double d = std::abs(positions[i] - w);
      // Strictly closer only, so ties keep the lower index.
      if (d < nearest_dist - 1e-9) {
        nearest = i;
        nearest_dist = d;
      }
    }
    out.views.push_back(sparse.views[nearest]);
  }
  return out;
}

LightField reconstruct_linear(const LightField& sparse, int target_views) {
  check_reconstruct_args(sparse, target_views, 2);
  const std::vector<double> positions = sample_positions(sparse, target_views);
  LightField out = dense_output(sparse, target_views);
  for (int w = 0; w < target_views; ++w) {
    const std::size_t i = segment_for(positions, w);
    const double t = (w - positions[i]) / (positions[i + 1] - positions[i]);
    if (t == 0.0) {
      out.views.push_back(sparse.views[i]);
    } else if (t == 1.0) {
      out.views.push_back(sparse.views[i + 1]);
    } else {
      out.views.push_back(mix(sparse.views[i], sparse.views[i + 1], t));
    }
  }
  return out;
}

LightField reconstruct_opt(const LightField& sparse, int target_views) {
  check_reconstruct_args(sparse, target_views, 2);
  const std::vector<double> positions = sample_positions(sparse, target_views);
  LightField out = dense_output(sparse, target_views);

  std::size_t cached_segment = positions.size();
  DisparityField forward;
  DisparityField backward;
  for (int w = 0; w < target_views; ++w) {
    const std::size_t i = segment_for(positions, w);
    const double gap = positions[i + 1] - positions[i];
    const double t = (w - positions[i]) / gap;
    if (t == 0.0) {
      out.views.push_back(sparse.views[i]);
      continue;
    }
    if (t == 1.0) {
      out.views.push_back(sparse.views[i + 1]);
      continue;
    }
    if (cached_segment != i) {
      BlockMatchOptions options;
      options.max_disparity = static_cast<int>(
          std::ceil(sparse.manifest.max_step_disparity * gap * 2.0));
      forward = estimate_disparity(sparse.views[i], sparse.views[i + 1], options);
      backward = estimate_disparity(sparse.views[i + 1], sparse.views[i], options);
      const DisparityField raw_forward = forward;
      cross_check(forward, backward, 1.0, 1.0);
      cross_check(backward, raw_forward, 1.0, -1.0);
      cached_segment = i;
    }
    // z is the disparity measured in the a->b direction for both warps.
    const detail::Splat from_a =
        detail::forward_warp(sparse.views[i], forward.disparity, t, 1.0);
    const detail::Splat from_b =
        detail::forward_warp(sparse.views[i + 1], backward.disparity, 1.0 - t, -1.0);
    out.views.push_back(detail::blend_splats(from_a, from_b, t, 1.0));
  }
  return out;
}

DepthMap quantize_depth(const DepthMap& depth, int levels) {
  if (levels < 2) {
    throw Error(ErrorCode::kInvalidArgument, "depth quantization needs >= 2 levels");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Plane& p : depth.views) {
    for (double v : p.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  DepthMap out = depth;
  if (!(hi > lo)) return out;
  const double step = (hi - lo) / (levels - 1);
  for (Plane& p : out.views) {
    for (double& v : p.data) {
      const double bin = std::clamp(std::round((v - lo) / step), 0.0, levels - 1.0);
      v = bin == levels - 1.0 ? hi : lo + bin * step;
    }
  }
  return out;
}

namespace {

void check_depth(const LightField& lf, const DepthMap& depth) {
  if (static_cast<int>(depth.views.size()) != lf.view_count()) {
    throw Error(ErrorCode::kInvalidArgument,
                "depth map missing or view count differs from the light field");
  }
  for (const Plane& p : depth.views) {
    if (p.width != lf.width() || p.height != lf.height()) {
      throw Error(ErrorCode::kDimensionMismatch, "depth map size differs from views");
    }
  }
}

}  // namespace

LightField distort_dq(const LightField& lf, const DepthMap& depth, int levels) {
  check_depth(lf, depth);
  const DepthMap quantized = quantize_depth(depth, levels);
  const std::vector<double> positions = view_positions(lf);
  const int center = (lf.view_count() - 1) / 2;
  LightField out;
  out.manifest = lf.manifest;
  for (int w = 0; w < lf.view_count(); ++w) {
    detail::Splat splat =
        detail::forward_warp(lf.views[center], quantized.views[center],
                             positions[w] - positions[center], 1.0, 1e-9);
    detail::fill_holes(splat);
    out.views.push_back(std::move(splat.image));
  }
  return out;
}

LightField distort_dq_sampled(const LightField& lf, const DepthMap& depth,
                              int levels, int k) {
  check_depth(lf, depth);
  const DepthMap quantized = quantize_depth(depth, levels);
  const std::vector<int> kept = subsample_indices(lf.view_count(), k);
  const std::vector<double> positions = view_positions(lf);
  LightField out;
  out.manifest = lf.manifest;
  if (kept.size() < 2) return lf;
  std::size_t seg = 0;
  for (int w = 0; w < lf.view_count(); ++w) {
    while (seg + 2 < kept.size() && kept[seg + 1] <= w) ++seg;
    const int a = kept[seg];
    const int b = kept[seg + 1];
    if (w == a || w == b) {
      out.views.push_back(lf.views[w]);
      continue;
    }
    const double t = (positions[w] - positions[a]) / (positions[b] - positions[a]);
    const detail::Splat from_a = detail::forward_warp(
        lf.views[a], quantized.views[a], positions[w] - positions[a], 1.0, 1e-9);
    const detail::Splat from_b = detail::forward_warp(
        lf.views[b], quantized.views[b], positions[w] - positions[b], 1.0, 1e-9);
    out.views.push_back(detail::blend_splats(from_a, from_b, t, 1e-9));
  }
  return out;
}

std::vector<double> crosstalk_weights(std::span<const double> display_positions,
                                      double position, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "crosstalk sigma must be > 0");
  }
  std::vector<double> weights(display_positions.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double d = position - display_positions[j];
    weights[j] = -d * d / (2.0 * sigma * sigma);
    top = std::max(top, weights[j]);
  }
  double sum = 0.0;
  for (double& w : weights) {
    w = std::exp(w - top);
    sum += w;
  }
  for (double& w : weights) w /= sum;
  return weights;
}

LightField distort_gauss(const LightField& lf, int k, double sigma_views) {
  if (k < 1 || !(sigma_views > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "GAUSS needs k >= 1 and sigma_views > 0");
  }
  const std::vector<int> kept = subsample_indices(lf.view_count(), k);
  const std::vector<double> positions = view_positions(lf);
  std::vector<double> display_positions;
  for (int i : kept) display_positions.push_back(positions[i]);
  const double sigma = sigma_views * k;

  LightField out;
  out.manifest = lf.manifest;
  for (int w = 0; w < lf.view_count(); ++w) {
    const std::vector<double> weights =
        crosstalk_weights(display_positions, positions[w], sigma);
    Image view(lf.width(), lf.height());
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (weights[j] == 0.0) continue;
      const Image& src = lf.views[kept[j]];
      for (std::size_t p = 0; p < view.data.size(); ++p) {
        view.data[p] += weights[j] * src.data[p];
      }
    }
    for (double& v : view.data) v = std::clamp(v, 0.0, 1.0);
    out.views.push_back(std::move(view));
  }
  return out;
}

LightField apply(const DistortionSpec& spec, const LightField& lf,
                 const DepthMap* depth) {
  validate(lf);
  LightField out;
  switch (spec.kind) {
    case DistortionKind::kNN:
    case DistortionKind::kLinear:
    case DistortionKind::kOpt: {
      const int k = spec.effective_k();
      if (k == 1) return lf;
      const LightField sparse = subsample_angular(lf, k);
      if (spec.kind == DistortionKind::kNN) {
        out = reconstruct_nn(sparse, lf.view_count());
      } else if (spec.kind == DistortionKind::kLinear) {
        out = reconstruct_linear(sparse, lf.view_count());
      } else {
        out = reconstruct_opt(sparse, lf.view_count());
      }
      break;
    }
    case DistortionKind::kDQ: {
      if (depth == nullptr) {
        throw Error(ErrorCode::kInvalidArgument,
                    "DQ needs a depth map (depth_available = true)");
      }
      const int k = spec.k > 0 ? spec.k : k_for_level(spec.level);
      out = k > 1 ? distort_dq_sampled(lf, *depth, spec.quantization_levels, k)
                  : distort_dq(lf, *depth, spec.quantization_levels);
      break;
    }
    case DistortionKind::kGauss:
      out = distort_gauss(lf, spec.effective_k(), spec.sigma_views);
      break;
    case DistortionKind::kExternal:
      throw Error(ErrorCode::kUnsupported,
                  "ingest externally coded views via load_light_field instead");
  }
  out.manifest = lf.manifest;
  return out;
}

}  // namespace lfqa
