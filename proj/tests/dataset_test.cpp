#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lfqa/dataset.hpp"
#include "lfqa/error.hpp"
#include "lfqa/io.hpp"
#include "lfqa/report.hpp"
#include "test_util.hpp"

namespace lfqa {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

GenerateConfig tiny_config(int scenes) {
  GenerateConfig cfg;
  cfg.profile = {"tiny", 26, 24, 16, {1, 2, 3}};
  for (int i = 0; i < scenes; ++i) cfg.scenes.push_back({"s" + std::to_string(i), 10u + i, {}});
  return cfg;
}

std::vector<std::pair<std::string, Bytes>> tree_files(const fs::path& root) {
  std::vector<std::pair<std::string, Bytes>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Csv, RoundTripsMetricRows) {
  std::vector<MetricRow> rows = {{"b", "NN", 2, "PSNR", 31.25, false},
                                 {"a", "reference", 0, "PSNR", INFINITY, true},
                                 {"a", "OPT", 1, "SSIM2D", 0.1 + 0.2, false}};
  const std::string csv = metric_rows_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scene,distortion_kind,level,metric_id,pooled,unbounded");
  const auto back = metric_rows_from_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].scene, "a");  // canonical order
  EXPECT_EQ(back[0].distortion_kind, "OPT");
  EXPECT_EQ(back[0].pooled, 0.1 + 0.2);
  EXPECT_TRUE(std::isinf(back[1].pooled));
  EXPECT_EQ(back[1].condition_id(), "reference");
  EXPECT_EQ(metric_rows_to_csv(back), csv);
}

TEST(Csv, RejectsBadInput) {
  EXPECT_THROW(metric_rows_from_csv("scene,x\n"), Error);
  EXPECT_THROW(metric_rows_from_csv("scene,distortion_kind,level,metric_id,pooled,unbounded\na,NN,1\n"),
               Error);
  EXPECT_THROW(metric_rows_from_csv(
                   "scene,distortion_kind,level,metric_id,pooled,unbounded\na,NN,x,PSNR,1,0\n"),
               Error);
  EXPECT_THROW(metric_rows_to_csv({{"a,b", "NN", 1, "PSNR", 1, false}}), Error);
}

TEST(Csv, ComparisonMatricesPerScene) {
  const std::vector<ComparisonRow> rows = {
      {"o1", "a", "reference", "NN_1", "reference"},
      {"o1", "a", "NN_1", "NN_2", "NN_2"},
      {"o2", "b", "reference", "NN_1", "NN_1"},
  };
  EXPECT_EQ(comparison_rows_from_csv(comparison_rows_to_csv(rows)), rows);
  const auto m = comparison_matrices(rows);
  ASSERT_EQ(m.size(), 2u);
  const ComparisonMatrix& a = m.at("a");
  EXPECT_EQ(a.condition_ids, (std::vector<std::string>{"reference", "NN_1", "NN_2"}));
  EXPECT_EQ(a.counts[0][1], 1);
  EXPECT_EQ(a.counts[2][1], 1);
  EXPECT_EQ(m.at("b").counts[1][0], 1);
  EXPECT_THROW(comparison_matrices({{"o", "a", "x", "y", "z"}}), Error);
}

TEST(Csv, JoinSkipsReferenceAndNeedsJod) {
  const std::vector<MetricRow> metrics = {{"a", "reference", 0, "PSNR", INFINITY, true},
                                          {"a", "NN", 1, "PSNR", 30, false},
                                          {"a", "NN", 1, "GMSD", 0.1, false}};
  const std::vector<JodRow> jods = {{"a", "reference", 0, 0, 0, 0}, {"a", "NN_1", -1, -1.5, -0.5, 0.04}};
  const auto pts = join_points(metrics, jods, "PSNR");
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].o, 30);
  EXPECT_EQ(pts[0].jod, -1);
  EXPECT_EQ(pts[0].var, 0.04);
  EXPECT_THROW(join_points(metrics, {jods[0]}, "PSNR"), Error);
  EXPECT_EQ(jod_rows_from_csv(jod_rows_to_csv(jods)), (std::vector<JodRow>{jods[1], jods[0]}));
}

TEST(Generate, WritesScenesDeterministically) {
  TempDir a, b;
  const GenerateConfig cfg = tiny_config(2);
  EXPECT_EQ(generate_dataset(cfg, a.path()).size(), 2u);
  generate_dataset(cfg, b.path());
  EXPECT_EQ(list_scenes(a.path()), (std::vector<std::string>{"s0", "s1"}));
  EXPECT_TRUE(fs::exists(a.path() / "s0" / kManifestFile));
  const auto files = tree_files(a.path());
  EXPECT_EQ(files, tree_files(b.path()));
  // Rerunning over an existing tree is bit-identical as well.
  generate_dataset(cfg, a.path());
  EXPECT_EQ(tree_files(a.path()), files);
  const LightField lf = load_light_field(a.path() / "s1");
  EXPECT_EQ(lf.view_count(), 26);
  EXPECT_TRUE(load_depth_map(a.path() / "s1").has_value());
}

TEST(Generate, BadSpecLeavesNothingBehind) {
  TempDir dir;
  GenerateConfig cfg = tiny_config(2);
  SceneSpec bad;
  bad.name = "broken";
  bad.width = 0;
  cfg.scenes.push_back({"broken", 0, bad});
  EXPECT_THROW(generate_dataset(cfg, dir.path()), Error);
  EXPECT_TRUE(fs::is_empty(dir.path()));
  cfg.scenes.pop_back();
  cfg.scenes.push_back({"../escape", 0, {}});
  EXPECT_THROW(generate_dataset(cfg, dir.path()), Error);
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(Generate, ConfigFromJson) {
  GenerateConfig cfg = generate_config_from_json(R"({"profile":"desk","scene_count":14,"seed":3})");
  EXPECT_EQ(cfg.scenes.size(), 14u);
  EXPECT_EQ(cfg.profile.width, 96);
  EXPECT_EQ(cfg.profile.views, 21);
  EXPECT_EQ(cfg.scenes[13].name, "scene_13");
  cfg = generate_config_from_json(R"({"profile":"full","width":32,"scenes":[{"name":"x","seed":1}]})");
  EXPECT_EQ(cfg.profile.views, 101);
  EXPECT_EQ(cfg.profile.width, 32);
  EXPECT_EQ(cfg.profile.levels.size(), 6u);
  EXPECT_THROW(generate_config_from_json("{"), Error);
  EXPECT_THROW(generate_config_from_json(R"({"profile":"huge","scene_count":1})"), Error);
}

TEST(Distort, TreeAndIndex) {
  TempDir src, out;
  GenerateConfig cfg = tiny_config(1);
  generate_dataset(cfg, src.path());
  DistortConfig dc;
  dc.kinds = {DistortionKind::kNN, DistortionKind::kLinear};
  dc.levels = {1, 2, 3, 4, 5, 6};
  const fs::path root = out.path() / "tree";
  const DatasetIndex index = distort_dataset(src.path(), dc, root);
  EXPECT_EQ(index.conditions.size(), 13u);  // 12 distorted + reference
  for (const IndexEntry& e : index.conditions) {
    EXPECT_TRUE(fs::exists(root / e.path / kManifestFile)) << e.path;
  }
  EXPECT_TRUE(fs::exists(root / "s0" / "NN" / "level_6"));
  EXPECT_EQ(load_index(root).conditions, index.conditions);
  EXPECT_NE(index.find("s0", "LINEAR_4"), nullptr);
  EXPECT_EQ(load_light_field(root / "s0" / "reference").views, load_light_field(src.path() / "s0").views);
}

TEST(Distort, DqWithoutDepthSkipped) {
  TempDir src, out;
  const Scene scene = generate_scene(random_scene_spec("nodepth", 3, 21, 24, 16));
  save_light_field(scene.light_field, src.path() / "nodepth");
  DistortConfig dc;
  dc.kinds = {DistortionKind::kNN, DistortionKind::kDQ};
  dc.levels = {1, 2};
  const DatasetIndex index = distort_dataset(src.path(), dc, out.path() / "t");
  EXPECT_EQ(index.conditions.size(), 3u);
  ASSERT_EQ(index.skipped.size(), 2u);
  EXPECT_EQ(index.skipped[0].kind, "DQ");
  EXPECT_EQ(load_index(out.path() / "t").skipped, index.skipped);
}

TEST(Distort, UnknownSceneFailsFast) {
  TempDir src, out;
  generate_dataset(tiny_config(1), src.path());
  DistortConfig dc;
  dc.scenes = {"s0", "missing"};
  EXPECT_THROW(distort_dataset(src.path(), dc, out.path() / "t"), Error);
  EXPECT_FALSE(fs::exists(out.path() / "t"));
  dc.scenes = {"s0"};
  dc.levels = {7};
  EXPECT_THROW(distort_dataset(src.path(), dc, out.path() / "t"), Error);
  TempDir small;
  GenerateConfig cfg = tiny_config(1);
  cfg.profile.views = 21;
  generate_dataset(cfg, small.path());
  dc.levels = {1, 6};  // k = 25 leaves too few of 21 views
  EXPECT_THROW(distort_dataset(small.path(), dc, out.path() / "t"), Error);
  EXPECT_TRUE(fs::is_empty(out.path()));
}

TEST(Distort, FullSyntheticLadderHasTwentyFiveConditions) {
  TempDir src, out;
  GenerateConfig cfg = tiny_config(1);
  generate_dataset(cfg, src.path());
  DistortConfig dc = distort_config_from_json(R"({"profile":"full"})");
  EXPECT_EQ(dc.kinds.size(), 4u);
  EXPECT_EQ(distort_dataset(src.path(), dc, out.path() / "t").conditions.size(), 25u);
}

}  // namespace
}  // namespace lfqa
