#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "lfqa/distort.hpp"
#include "lfqa/error.hpp"
#include "lfqa/scene.hpp"
#include "test_util.hpp"

namespace lfqa {
namespace {

using testing::constant_light_field;
using testing::from_views;
using testing::mean_abs_difference;

double mse(const LightField& a, const LightField& b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int w = 0; w < a.view_count(); ++w) {
    for (std::size_t i = 0; i < a.views[w].data.size(); ++i) {
      const double d = a.views[w].data[i] - b.views[w].data[i];
      sum += d * d;
      ++n;
    }
  }
  return sum / n;
}

// Step edge at x0 + d*w in view w: 0 to the left, 1 from the edge on.
LightField step_edge_light_field(int views, int width, double x0, double d) {
  std::vector<Image> frames;
  for (int w = 0; w < views; ++w) {
    Image img(width, 2);
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < width; ++x) {
        const double v = x >= x0 + d * w ? 1.0 : 0.0;
        for (int c = 0; c < 3; ++c) img(y, x, c) = v;
      }
    }
    frames.push_back(std::move(img));
  }
  return from_views(std::move(frames));
}

TEST(ReconstructNN, MidpointTieGoesToLowerView) {
  const LightField sparse =
      from_views({Image(4, 3, 0.2), Image(4, 3, 0.8)});
  const LightField dense = reconstruct_nn(sparse, 3);
  ASSERT_EQ(dense.view_count(), 3);
  EXPECT_TRUE(dense.views[0] == sparse.views[0]);
  EXPECT_TRUE(dense.views[1] == sparse.views[0]);
  EXPECT_TRUE(dense.views[2] == sparse.views[1]);
}

TEST(ReconstructNN, SameCountIsIdentity) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(1.0, 5, 16, 8)).light_field;
  EXPECT_TRUE(reconstruct_nn(lf, 5).views == lf.views);
  EXPECT_TRUE(reconstruct_linear(lf, 5).views == lf.views);
  EXPECT_TRUE(reconstruct_opt(lf, 5).views == lf.views);
}

// Changes along w in any EPI column only happen where the nearest sample
// changes, and interior runs have length k.
TEST(ReconstructNN, EpiRunsHaveLengthK) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(1.0, 21, 32, 4)).light_field;
  const int k = 5;
  const LightField nn = reconstruct_nn(subsample_angular(lf, k), 21);
  const Epi epi = extract_epi(nn, 2);
  std::map<int, int> run_lengths;
  for (int x = 0; x < epi.width; ++x) {
    int run = 1;
    for (int w = 1; w < epi.height; ++w) {
      if (epi(w, x, 0) == epi(w - 1, x, 0)) {
        ++run;
        continue;
      }
      // Nearest samples of w-1 and w differ only across w = 3, 8, 13, 18.
      EXPECT_EQ(w % k, 3) << "change at w=" << w;
      run_lengths[run]++;
      run = 1;
    }
    run_lengths[run]++;
  }
  // Interior runs are exactly k; the two end runs are 3 long.
  for (const auto& [length, count] : run_lengths) {
    EXPECT_TRUE(length == k || length == 3) << "run " << length;
  }
}

TEST(ReconstructLinear, BlackWhiteMidpointIsGray) {
  const LightField sparse = from_views({Image(4, 3, 0.0), Image(4, 3, 1.0)});
  const LightField dense = reconstruct_linear(sparse, 3);
  for (double v : dense.views[1].data) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(ReconstructLinear, GhostingShowsTwoHalfEdges) {
  const double d = 1.0;
  const int k = 8;
  const LightField lf = step_edge_light_field(17, 64, 20.0, d);
  const LightField dense = reconstruct_linear(subsample_angular(lf, k), 17);
  // View 4 sits halfway between samples 0 and 8.
  const Image& mid = dense.views[4];
  for (int x = 0; x < 64; ++x) {
    double expected = 0.0;
    if (x >= 20.0 + d * 0) expected += 0.5;
    if (x >= 20.0 + d * 8) expected += 0.5;
    EXPECT_DOUBLE_EQ(mid(0, x, 0), expected) << "x=" << x;
  }
  // Two half-amplitude edges d*k px apart.
  std::vector<int> edges;
  for (int x = 1; x < 64; ++x) {
    if (mid(0, x, 0) - mid(0, x - 1, 0) == 0.5) edges.push_back(x);
  }
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_EQ(edges[1] - edges[0], static_cast<int>(d * k));
}

TEST(EstimateDisparity, IdenticalViewsGiveZero) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(0.0, 1, 48, 32)).light_field;
  BlockMatchOptions options;
  options.max_disparity = 6;
  const DisparityField f = estimate_disparity(lf.views[0], lf.views[0], options);
  for (double v : f.disparity.data) EXPECT_EQ(v, 0.0);
}

TEST(EstimateDisparity, RecoversGlobalShift) {
  // View 1 of a 2-view, 3 px/step scene is view 0 shifted right by 3 px.
  const LightField lf =
      generate_scene(testing::single_layer_spec(3.0, 2, 64, 32)).light_field;
  BlockMatchOptions options;
  options.max_disparity = 8;
  const DisparityField f = estimate_disparity(lf.views[0], lf.views[1], options);
  int checked = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 60; ++x) {
      if (!f.confident[y * 64 + x]) continue;
      EXPECT_NEAR(f.disparity(y, x), 3.0, 0.5);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1500);
}

TEST(EstimateDisparity, FractionalShiftWithinHalfPixel) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(2.4, 2, 64, 32)).light_field;
  BlockMatchOptions options;
  options.max_disparity = 6;
  const DisparityField f = estimate_disparity(lf.views[0], lf.views[1], options);
  for (int y = 4; y < 28; ++y) {
    for (int x = 4; x < 56; ++x) EXPECT_NEAR(f.disparity(y, x), 2.4, 0.5);
  }
}

TEST(EstimateDisparity, TwoLayerInteriors) {
  const Scene scene = generate_scene(testing::two_layer_spec(0.0, 2.0, 2, 80, 48));
  BlockMatchOptions options;
  options.max_disparity = 6;
  const DisparityField f = estimate_disparity(scene.light_field.views[0],
                                              scene.light_field.views[1], options);
  const Plane& truth = scene.depth.views[0];
  int front = 0;
  int back = 0;
  for (int y = 6; y < 42; ++y) {
    for (int x = 6; x < 70; ++x) {
      // Interior: every pixel within 6 px carries the same layer.
      bool interior = true;
      for (int dy = -6; dy <= 6 && interior; ++dy) {
        for (int dx = -6; dx <= 6; ++dx) {
          if (truth(y + dy, x + dx) != truth(y, x)) {
            interior = false;
            break;
          }
        }
      }
      if (!interior) continue;
      EXPECT_NEAR(f.disparity(y, x), truth(y, x), 0.5) << y << "," << x;
      (truth(y, x) > 1.0 ? front : back)++;
    }
  }
  EXPECT_GT(front, 100);
  EXPECT_GT(back, 100);
}

TEST(ReconstructOpt, ZeroDisparitySceneIsExact) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(0.0, 9, 32, 16)).light_field;
  const LightField opt = reconstruct_opt(subsample_angular(lf, 4), 9);
  const LightField lin = reconstruct_linear(subsample_angular(lf, 4), 9);
  for (int w = 0; w < 9; ++w) {
    EXPECT_TRUE(opt.views[w] == lf.views[w]);
    EXPECT_LT(mean_abs_difference(lin.views[w], lf.views[w]), 1e-15);
  }
}

TEST(ReconstructOpt, SingleLayerMatchesGroundTruth) {
  for (double d : {1.0, 0.5, -1.0}) {
    const LightField lf =
        generate_scene(testing::single_layer_spec(d, 17, 64, 32)).light_field;
    const LightField opt = reconstruct_opt(subsample_angular(lf, 8), 17);
    for (int w = 0; w < 17; ++w) {
      EXPECT_LE(mean_abs_difference(opt.views[w], lf.views[w]), 2.0 / 255.0)
          << "d=" << d << " view " << w;
    }
  }
}

TEST(ReconstructOpt, BeatsLinearOnTwoLayerScene) {
  const LightField lf =
      generate_scene(testing::two_layer_spec(0.0, 1.0, 17, 96, 64)).light_field;
  const LightField sparse = subsample_angular(lf, 8);
  const double mse_opt = mse(reconstruct_opt(sparse, 17), lf);
  const double mse_lin = mse(reconstruct_linear(sparse, 17), lf);
  EXPECT_LT(mse_opt, mse_lin);
  EXPECT_GT(10.0 * std::log10(1.0 / mse_opt), 10.0 * std::log10(1.0 / mse_lin));
}

TEST(Reconstruct, SampleViewsAreExact) {
  const LightField lf =
      generate_scene(testing::two_layer_spec(-0.3, 1.1, 21, 48, 32)).light_field;
  for (int k : {2, 5, 8}) {
    const std::vector<int> kept = subsample_indices(21, k);
    const LightField sparse = subsample_angular(lf, k);
    for (const LightField& out :
         {reconstruct_nn(sparse, 21), reconstruct_linear(sparse, 21),
          reconstruct_opt(sparse, 21)}) {
      ASSERT_EQ(out.view_count(), 21);
      ASSERT_EQ(out.width(), 48);
      ASSERT_EQ(out.height(), 32);
      for (int i : kept) EXPECT_TRUE(out.views[i] == lf.views[i]) << "k=" << k;
    }
  }
}

TEST(QuantizeDepth, LevelsIncludeRangeEnds) {
  DepthMap depth;
  Plane p(5, 1);
  p.data = {0.0, 0.4, 1.0, 1.6, 2.0};
  depth.views.push_back(p);
  const DepthMap q = quantize_depth(depth, 3);
  const std::vector<double> expected = {0.0, 0.0, 1.0, 2.0, 2.0};
  EXPECT_EQ(q.views[0].data, expected);
  EXPECT_THROW(quantize_depth(depth, 1), Error);
}

TEST(DistortDQ, ConstantDepthEqualsExactWarp) {
  const Scene scene = generate_scene(testing::single_layer_spec(1.0, 9, 48, 16));
  for (int levels : {2, 8}) {
    const LightField dq = distort_dq(scene.light_field, scene.depth, levels);
    // Integer disparity: the warp reproduces the rendered views except for
    // the columns entering from outside the center view.
    for (int w = 0; w < 9; ++w) {
      const int shift = w - 4;
      for (int y = 0; y < 16; ++y) {
        for (int x = std::max(0, shift); x < std::min(48, 48 + shift); ++x) {
          ASSERT_EQ(dq.views[w](y, x, 0), scene.light_field.views[w](y, x, 0));
        }
      }
    }
  }
}

TEST(DistortDQ, TwoLayerInteriorsReproduced) {
  const Scene scene = generate_scene(testing::two_layer_spec(0.0, 1.0, 9, 80, 40));
  const LightField dq = distort_dq(scene.light_field, scene.depth, 8);
  const DepthMap q = quantize_depth(scene.depth, 8);
  // Well-separated layers keep their exact disparities.
  for (double v : q.views[4].data) EXPECT_TRUE(v == 0.0 || v == 1.0);
  for (int w = 0; w < 9; ++w) {
    double sum = 0.0;
    int n = 0;
    const Plane& truth = scene.depth.views[w];
    for (int y = 2; y < 38; ++y) {
      for (int x = 6; x < 74; ++x) {
        bool interior = true;
        for (int dx = -5; dx <= 5; ++dx) {
          if (truth(y, x + dx) != truth(y, x)) interior = false;
        }
        if (!interior) continue;
        for (int c = 0; c < 3; ++c) {
          sum += std::abs(dq.views[w](y, x, c) - scene.light_field.views[w](y, x, c));
        }
        n += 3;
      }
    }
    EXPECT_LE(sum / n, 2.0 / 255.0) << "view " << w;
  }
}

TEST(DistortDQ, TwoLevelsCollapseRampToTwoSlopes) {
  const int width = 96;
  const LightField lf =
      generate_scene(testing::single_layer_spec(0.0, 5, width, 40)).light_field;
  DepthMap ramp;
  for (int w = 0; w < 5; ++w) {
    Plane p(width, 40);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < width; ++x) p(y, x) = 2.0 * x / (width - 1);
    }
    ramp.views.push_back(p);
  }
  auto slope_histogram = [&](int levels) {
    const LightField dq = distort_dq(lf, ramp, levels);
    BlockMatchOptions options;
    options.max_disparity = 4;
    const DisparityField f = estimate_disparity(dq.views[2], dq.views[3], options);
    std::map<int, int> hist;
    for (int y = 6; y < 34; ++y) {
      for (int x = 8; x < width - 8; ++x) {
        hist[static_cast<int>(std::lround(f.disparity(y, x) * 2.0))]++;
      }
    }
    return hist;
  };
  const std::map<int, int> two = slope_histogram(2);
  int total = 0;
  for (const auto& [bin, count] : two) total += count;
  // Modes at slope 0 and slope 2 (bins 0 and 4 in half-pixel units).
  const int at_zero = two.count(0) ? two.at(0) : 0;
  const int at_two = two.count(4) ? two.at(4) : 0;
  EXPECT_GT(at_zero, total / 5);
  EXPECT_GT(at_two, total / 5);
  EXPECT_GT(at_zero + at_two, 0.85 * total);
  // The unquantized ramp spreads over intermediate slopes.
  const std::map<int, int> fine = slope_histogram(64);
  const int fine_ends = (fine.count(0) ? fine.at(0) : 0) + (fine.count(4) ? fine.at(4) : 0);
  EXPECT_LT(fine_ends, 0.6 * total);
}

TEST(DistortGauss, ConstantFieldUnchanged) {
  const LightField lf = constant_light_field(21, 8, 4, 0.37);
  const LightField out = distort_gauss(lf, 5, 0.5);
  for (const Image& v : out.views) {
    for (double x : v.data) EXPECT_NEAR(x, 0.37, 1e-15);
  }
}

TEST(DistortGauss, TinySigmaIsNearIdentity) {
  const LightField lf =
      generate_scene(testing::two_layer_spec(0.0, 1.0, 9, 32, 16)).light_field;
  const LightField out = distort_gauss(lf, 1, 0.05);
  for (int w = 0; w < 9; ++w) {
    for (std::size_t i = 0; i < lf.views[w].data.size(); ++i) {
      EXPECT_NEAR(out.views[w].data[i], lf.views[w].data[i], 1.0 / 255.0);
    }
  }
}

TEST(DistortGauss, ImpulseResponseIsNormalizedGaussian) {
  const int views = 11;
  const int bright = 4;
  std::vector<Image> frames;
  for (int w = 0; w < views; ++w) frames.emplace_back(2, 2, w == bright ? 1.0 : 0.0);
  const LightField out = distort_gauss(from_views(frames), 1, 1.0);
  for (int w = 0; w < views; ++w) {
    double norm = 0.0;
    for (int j = 0; j < views; ++j) norm += std::exp(-0.5 * (w - j) * (w - j));
    const double expected = std::exp(-0.5 * (w - bright) * (w - bright)) / norm;
    EXPECT_NEAR(out.views[w](0, 0, 0), expected, 1e-6);
  }
}

TEST(DistortGauss, WeightsSumToOne) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> positions;
    double p = 0.0;
    const int n = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      positions.push_back(p);
      p += rng.uniform(0.5, 30.0);
    }
    const double sigma = rng.uniform(0.01, 20.0);
    const std::vector<double> w =
        crosstalk_weights(positions, rng.uniform(-5.0, p + 5.0), sigma);
    double sum = 0.0;
    for (double x : w) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Apply, NNLevelOneOn101Views) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(1.0, 101, 24, 6)).light_field;
  DistortionSpec spec;
  spec.kind = DistortionKind::kNN;
  spec.level = 1;
  EXPECT_EQ(spec.effective_k(), 2);
  const LightField out = apply(spec, lf, nullptr);
  ASSERT_EQ(out.view_count(), 101);
  // Piecewise constant: every odd view copies its lower even neighbor.
  for (int w = 1; w < 101; w += 2) EXPECT_TRUE(out.views[w] == out.views[w - 1]);
}

TEST(Apply, DQUsesDepth) {
  const Scene scene = generate_scene(testing::two_layer_spec(0.0, 1.0, 9, 40, 20));
  DistortionSpec spec;
  spec.kind = DistortionKind::kDQ;
  spec.k = 1;
  spec.quantization_levels = 8;
  EXPECT_TRUE(apply(spec, scene.light_field, &scene.depth).views ==
              distort_dq(scene.light_field, scene.depth, 8).views);
  EXPECT_THROW(apply(spec, scene.light_field, nullptr), Error);
  spec.k = 0;
  spec.level = 2;
  const LightField sampled = apply(spec, scene.light_field, &scene.depth);
  EXPECT_EQ(sampled.view_count(), 9);
}

TEST(Apply, LinearWithUnitStepIsIdentity) {
  const LightField lf =
      generate_scene(testing::single_layer_spec(1.0, 7, 16, 8)).light_field;
  DistortionSpec spec;
  spec.kind = DistortionKind::kLinear;
  spec.k = 1;
  EXPECT_TRUE(apply(spec, lf, nullptr) == lf);
}

TEST(Apply, ExternalIsRejected) {
  const LightField lf = constant_light_field(3, 4, 4, 0.5);
  DistortionSpec spec;
  spec.kind = DistortionKind::kExternal;
  try {
    apply(spec, lf, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("load_light_field"), std::string::npos);
  }
}

TEST(Apply, PreservesShapeAndIsDeterministic) {
  const Scene scene = generate_scene(random_scene_spec("s", 3, 21, 48, 32));
  for (DistortionKind kind : {DistortionKind::kNN, DistortionKind::kLinear,
                              DistortionKind::kOpt, DistortionKind::kDQ,
                              DistortionKind::kGauss}) {
    DistortionSpec spec;
    spec.kind = kind;
    spec.level = 2;
    const LightField a = apply(spec, scene.light_field, &scene.depth);
    const LightField b = apply(spec, scene.light_field, &scene.depth);
    EXPECT_EQ(a.view_count(), 21);
    EXPECT_EQ(a.width(), 48);
    EXPECT_EQ(a.height(), 32);
    EXPECT_TRUE(a == b) << kind_name(kind);
    EXPECT_NO_THROW(validate(a));
  }
}

TEST(Apply, ErrorGrowsWithSubsamplingFactor) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Scene scene = generate_scene(random_scene_spec("m", seed, 51, 48, 24));
    for (DistortionKind kind :
         {DistortionKind::kNN, DistortionKind::kLinear, DistortionKind::kGauss}) {
      double previous = 0.0;
      for (int k : kSubsamplingLadder) {
        DistortionSpec spec;
        spec.kind = kind;
        spec.k = k;
        const double err = mse(apply(spec, scene.light_field, nullptr), scene.light_field);
        EXPECT_GE(err, previous) << kind_name(kind) << " k=" << k << " seed " << seed;
        previous = err;
      }
    }
  }
}

TEST(DistortionSpec, JsonRoundTrip) {
  DistortionSpec spec;
  spec.kind = DistortionKind::kGauss;
  spec.level = 3;
  spec.sigma_views = 0.75;
  const DistortionSpec back = distortion_spec_from_json(distortion_spec_to_json(spec));
  EXPECT_EQ(back.kind, DistortionKind::kGauss);
  EXPECT_EQ(back.effective_k(), 8);
  EXPECT_EQ(back.sigma_views, 0.75);
  EXPECT_THROW(distortion_spec_from_json("{\"kind\":\"BLUR\"}"), Error);
  EXPECT_THROW(k_for_level(7), Error);
}

}  // namespace
}  // namespace lfqa
