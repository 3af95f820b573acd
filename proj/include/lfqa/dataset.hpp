#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfqa/distort.hpp"
#include "lfqa/scene.hpp"

namespace lfqa {

// Scene geometry plus the severity levels that get rendered.
struct Profile {
  std::string name;
  int views = 21;
  int width = 96;
  int height = 64;
  std::vector<int> levels;
};

// 96x64x21, levels 1..3 (k = 2, 5, 8).
Profile desk_profile();
// 101 views and all six levels.
Profile full_profile();
Profile profile_from_name(const std::string& name);

struct SceneEntry {
  std::string name;
  std::uint64_t seed = 0;
  // Explicit layers; otherwise random_scene_spec(name, seed, ...).
  std::optional<SceneSpec> spec;
};

struct GenerateConfig {
  Profile profile = desk_profile();
  std::vector<SceneEntry> scenes;
};

// {"profile": "desk"|"full", "views"/"width"/"height": overrides,
//  "scenes": [{"name", "seed"} | {"spec": {...}}]  or  "scene_count" + "seed"}
GenerateConfig generate_config_from_json(const std::string& text);

SceneSpec resolve_spec(const SceneEntry& entry, const Profile& profile);

// Renders every scene into root/<name>. All scenes are rendered into a
// staging directory first, so a failure leaves no partial scene behind.
std::vector<std::filesystem::path> generate_dataset(const GenerateConfig& config,
                                                    const std::filesystem::path& root);

struct DistortConfig {
  std::vector<DistortionKind> kinds = {DistortionKind::kNN, DistortionKind::kLinear,
                                       DistortionKind::kOpt, DistortionKind::kDQ};
  std::vector<int> levels = {1, 2, 3};
  // Empty: every scene directory under the source root.
  std::vector<std::string> scenes;
};

// {"profile": ..., "kinds": [...], "levels": [...], "scenes": [...]}; levels
// default to the profile's.
DistortConfig distort_config_from_json(const std::string& text);

struct IndexEntry {
  std::string scene;
  std::string kind;  // "reference" for the undistorted light field
  int level = 0;
  std::string id;
  std::string path;  // relative to the dataset root

  bool operator==(const IndexEntry&) const = default;
};

struct SkippedEntry {
  std::string scene;
  std::string kind;
  int level = 0;
  std::string reason;

  bool operator==(const SkippedEntry&) const = default;
};

struct DatasetIndex {
  std::vector<IndexEntry> conditions;
  std::vector<SkippedEntry> skipped;

  std::vector<std::string> scenes() const;
  const IndexEntry* find(const std::string& scene, const std::string& id) const;
};

inline constexpr const char* kIndexFile = "index.json";

std::string index_to_json(const DatasetIndex& index);
DatasetIndex index_from_json(const std::string& text);
DatasetIndex load_index(const std::filesystem::path& root);

// Scene directories (those holding a manifest) directly under `root`, sorted.
std::vector<std::string> list_scenes(const std::filesystem::path& root);

// Writes out/<scene>/reference and out/<scene>/<KIND>/level_<n> plus
// index.json. DQ on a scene without depth is skipped and recorded. The tree
// is built in a staging directory and renamed into place at the end.
DatasetIndex distort_dataset(const std::filesystem::path& source_root,
                             const DistortConfig& config, const std::filesystem::path& out_root);

}  // namespace lfqa
