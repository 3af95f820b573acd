#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "lfqa/image.hpp"
#include "lfqa/light_field.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/scene.hpp"

namespace lfqa::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lfqa_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline LightField constant_light_field(int views, int width, int height,
                                       double value) {
  LightField lf;
  for (int i = 0; i < views; ++i) lf.views.emplace_back(width, height, value);
  lf.manifest = make_manifest("constant", lf.views, 1.0);
  return lf;
}

inline LightField from_views(std::vector<Image> views) {
  LightField lf;
  lf.views = std::move(views);
  lf.manifest = make_manifest("views", lf.views, 1.0);
  return lf;
}

// One full-frame textured layer at the given disparity.
inline SceneSpec single_layer_spec(double disparity, int views, int width,
                                   int height, std::uint64_t seed = 7) {
  SceneSpec spec;
  spec.name = "single";
  spec.views = views;
  spec.width = width;
  spec.height = height;
  LayerSpec layer;
  layer.texture_seed = seed;
  layer.disparity = disparity;
  layer.feature_size = 8.0;
  spec.layers.push_back(layer);
  return spec;
}

// Full-frame background plus a rectangular occluder in the middle.
inline SceneSpec two_layer_spec(double back, double front, int views, int width,
                                int height, std::uint64_t seed = 11) {
  SceneSpec spec = single_layer_spec(back, views, width, height, seed);
  spec.name = "two_layer";
  LayerSpec front_layer;
  front_layer.texture_seed = seed * 31 + 5;
  front_layer.disparity = front;
  front_layer.feature_size = 6.0;
  front_layer.mask.shape = MaskShape::kRect;
  front_layer.mask.x0 = 0.3 * width;
  front_layer.mask.x1 = 0.7 * width;
  front_layer.mask.y0 = 0.25 * height;
  front_layer.mask.y1 = 0.75 * height;
  spec.layers.push_back(front_layer);
  return spec;
}

inline double mean_abs_difference(const Image& a, const Image& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(a.data[i] - b.data[i]);
  }
  return sum / static_cast<double>(a.data.size());
}

}  // namespace lfqa::testing
