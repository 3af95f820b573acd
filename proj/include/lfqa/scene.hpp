#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfqa/light_field.hpp"

namespace lfqa {

enum class MaskShape { kFull, kRect, kEllipse };

// Opacity mask in the layer's own coordinates, which coincide with pixel
// coordinates of the central view. The box is [x0,x1) x [y0,y1).
struct OpacityMask {
  MaskShape shape = MaskShape::kFull;
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool covers(double u, double v) const;
};

struct LayerSpec {
  std::uint64_t texture_seed = 0;
  // Horizontal shift in pixels per angular step.
  double disparity = 0.0;
  OpacityMask mask;
  // Period of the coarsest noise octave, in pixels.
  double feature_size = 8.0;
};

struct SceneSpec {
  std::string name = "scene";
  int views = 21;
  int width = 96;
  int height = 64;
  // Painted in order of increasing disparity (larger disparity is nearer).
  std::vector<LayerSpec> layers;
};

struct Scene {
  LightField light_field;
  DepthMap depth;
};

// Renders layered textured planes. View w shows layer point
// u = x - disparity * (w - (V-1)/2). Deterministic in the spec.
Scene generate_scene(const SceneSpec& spec);

// Smooth color texture evaluated at continuous layer coordinates; each
// channel lies in [0.05, 0.95].
void sample_texture(std::uint64_t seed, double feature_size, double u, double v,
                    double rgb[3]);

// A background plane plus 1-3 occluders with varied shapes and disparities,
// all drawn from `seed`.
SceneSpec random_scene_spec(const std::string& name, std::uint64_t seed,
                            int views, int width, int height);

std::string scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const std::string& text);

}  // namespace lfqa
