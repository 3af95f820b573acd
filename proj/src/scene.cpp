#include "lfqa/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/rng.hpp"

namespace lfqa {

using nlohmann::json;

bool OpacityMask::covers(double u, double v) const {
  switch (shape) {
    case MaskShape::kFull:
      return true;
    case MaskShape::kRect:
      return u >= x0 && u < x1 && v >= y0 && v < y1;
    case MaskShape::kEllipse: {
      const double cx = 0.5 * (x0 + x1);
      const double cy = 0.5 * (y0 + y1);
      const double rx = 0.5 * (x1 - x0);
      const double ry = 0.5 * (y1 - y0);
      if (rx <= 0.0 || ry <= 0.0) return false;
      const double dx = (u - cx) / rx;
      const double dy = (v - cy) / ry;
      return dx * dx + dy * dy <= 1.0;
    }
  }
  return false;
}

namespace {

double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy,
                     int channel) {
  std::uint64_t h = hash_combine(seed, static_cast<std::uint64_t>(ix));
  h = hash_combine(h, static_cast<std::uint64_t>(iy));
  h = hash_combine(h, static_cast<std::uint64_t>(channel));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(std::uint64_t seed, double u, double v, int channel) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto ix = static_cast<std::int64_t>(fu);
  const auto iy = static_cast<std::int64_t>(fv);
  const double tu = fade(u - fu);
  const double tv = fade(v - fv);
  const double a = lattice_value(seed, ix, iy, channel);
  const double b = lattice_value(seed, ix + 1, iy, channel);
  const double c = lattice_value(seed, ix, iy + 1, channel);
  const double d = lattice_value(seed, ix + 1, iy + 1, channel);
  const double top = a + (b - a) * tu;
  const double bottom = c + (d - c) * tu;
  return top + (bottom - top) * tv;
}

}  // namespace

void sample_texture(std::uint64_t seed, double feature_size, double u, double v,
                    double rgb[3]) {
  // Three octaves, finest period feature_size / 4 but at least 4 px so
  // half-pixel parallax stays below Nyquist.
  constexpr double kWeights[3] = {0.5, 0.3, 0.2};
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    double period = feature_size;
    for (int octave = 0; octave < 3; ++octave) {
      const double p = std::max(period, 4.0);
      sum += kWeights[octave] *
             value_noise(hash_combine(seed, octave), u / p, v / p, c);
      period *= 0.5;
    }
    // Stretch contrast around the mean, then clamp into the safe band.
    const double stretched = 0.5 + 1.6 * (sum - 0.5);
    rgb[c] = std::clamp(stretched, 0.05, 0.95);
  }
}

Scene generate_scene(const SceneSpec& spec) {
  if (spec.views < 1 || spec.width < 1 || spec.height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "scene views, width and height must be >= 1");
  }
  for (const LayerSpec& layer : spec.layers) {
    if (!std::isfinite(layer.disparity) || !(layer.feature_size > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "layer disparity must be finite and feature size positive");
    }
  }
  std::vector<std::size_t> order(spec.layers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.layers[a].disparity < spec.layers[b].disparity;
  });

  const double center = 0.5 * (spec.views - 1);
  Scene scene;
  double max_disparity = 0.0;
  for (const LayerSpec& layer : spec.layers) {
    max_disparity = std::max(max_disparity, std::abs(layer.disparity));
  }
  for (int w = 0; w < spec.views; ++w) {
    Image view(spec.width, spec.height);
    Plane depth(spec.width, spec.height);
    const double offset = w - center;
    for (std::size_t li : order) {
      const LayerSpec& layer = spec.layers[li];
      const double shift = layer.disparity * offset;
      for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
          const double u = x - shift;
          const double v = y;
          if (!layer.mask.covers(u, v)) continue;
          double rgb[3];
          sample_texture(layer.texture_seed, layer.feature_size, u, v, rgb);
          for (int c = 0; c < 3; ++c) view(y, x, c) = rgb[c];
          depth(y, x) = layer.disparity;
        }
      }
    }
    scene.light_field.views.push_back(std::move(view));
    scene.depth.views.push_back(std::move(depth));
  }
  scene.light_field.manifest =
      make_manifest(spec.name, scene.light_field.views,
                    std::max(max_disparity, 1.0));
  scene.light_field.manifest.source = SourceKind::kSynthetic;
  scene.light_field.manifest.depth_available = true;
  return scene;
}

SceneSpec random_scene_spec(const std::string& name, std::uint64_t seed,
                            int views, int width, int height) {
  Rng rng(hash_combine(seed, 0x5ce7e));
  SceneSpec spec;
  spec.name = name;
  spec.views = views;
  spec.width = width;
  spec.height = height;

  LayerSpec background;
  background.texture_seed = rng.next();
  background.disparity = rng.uniform(-0.4, 0.2);
  background.feature_size = rng.uniform(6.0, 14.0);
  spec.layers.push_back(background);

  const int occluders = 1 + static_cast<int>(rng.below(3));
  for (int i = 0; i < occluders; ++i) {
    LayerSpec layer;
    layer.texture_seed = rng.next();
    layer.disparity = rng.uniform(0.4, 1.2);
    layer.feature_size = rng.uniform(4.0, 10.0);
    layer.mask.shape = rng.coin() ? MaskShape::kRect : MaskShape::kEllipse;
    const double w = rng.uniform(0.2, 0.5) * width;
    const double h = rng.uniform(0.3, 0.7) * height;
    layer.mask.x0 = rng.uniform(0.05, 0.95) * width - 0.5 * w;
    layer.mask.y0 = rng.uniform(0.1, 0.9) * height - 0.5 * h;
    layer.mask.x1 = layer.mask.x0 + w;
    layer.mask.y1 = layer.mask.y0 + h;
    spec.layers.push_back(layer);
  }
  return spec;
}

namespace {

const char* mask_name(MaskShape shape) {
  switch (shape) {
    case MaskShape::kFull: return "full";
    case MaskShape::kRect: return "rect";
    case MaskShape::kEllipse: return "ellipse";
  }
  return "full";
}

MaskShape mask_from_name(const std::string& name) {
  if (name == "full") return MaskShape::kFull;
  if (name == "rect") return MaskShape::kRect;
  if (name == "ellipse") return MaskShape::kEllipse;
  throw Error(ErrorCode::kFormat, "unknown mask shape '" + name + "'");
}

}  // namespace

std::string scene_spec_to_json(const SceneSpec& spec) {
  json layers = json::array();
  for (const LayerSpec& layer : spec.layers) {
    layers.push_back({
        {"texture_seed", layer.texture_seed},
        {"disparity", layer.disparity},
        {"feature_size", layer.feature_size},
        {"mask",
         {{"shape", mask_name(layer.mask.shape)},
          {"box", {layer.mask.x0, layer.mask.y0, layer.mask.x1, layer.mask.y1}}}},
    });
  }
  json j = {{"name", spec.name},     {"views", spec.views},
            {"width", spec.width},   {"height", spec.height},
            {"layers", layers}};
  return j.dump(2) + "\n";
}

SceneSpec scene_spec_from_json(const std::string& text) {
  SceneSpec spec;
  try {
    const json j = json::parse(text);
    spec.name = j.at("name").get<std::string>();
    spec.views = j.at("views").get<int>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    for (const json& jl : j.at("layers")) {
      LayerSpec layer;
      layer.texture_seed = jl.at("texture_seed").get<std::uint64_t>();
      layer.disparity = jl.at("disparity").get<double>();
      layer.feature_size = jl.value("feature_size", 8.0);
      if (jl.contains("mask")) {
        const json& jm = jl.at("mask");
        layer.mask.shape = mask_from_name(jm.value("shape", "full"));
        if (jm.contains("box")) {
          const auto box = jm.at("box").get<std::vector<double>>();
          if (box.size() != 4) {
            throw Error(ErrorCode::kFormat, "mask box needs 4 numbers");
          }
          layer.mask.x0 = box[0];
          layer.mask.y0 = box[1];
          layer.mask.x1 = box[2];
          layer.mask.y1 = box[3];
        }
      }
      spec.layers.push_back(layer);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad scene spec: ") + e.what());
  }
  return spec;
}

}  // namespace lfqa
