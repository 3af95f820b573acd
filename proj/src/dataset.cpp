#include "lfqa/dataset.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/io.hpp"
#include "lfqa/scaling.hpp"

namespace lfqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_name(const std::string& name) {
  const bool ok = !name.empty() && name[0] != '.' &&
                  std::all_of(name.begin(), name.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                           c == '.';
                  });
  if (!ok || name == "reference") {
    throw Error(ErrorCode::kInvalidArgument, "bad scene name '" + name + "'");
  }
}

// Sibling directory used while building `target`.
fs::path staging_path(const fs::path& target) {
  return target.parent_path() /
         ("." + target.filename().string() + ".staging-" + std::to_string(::getpid()));
}

// Replaces `target` with `staged`.
void commit(const fs::path& staged, const fs::path& target) {
  std::error_code ec;
  fs::remove_all(target, ec);
  fs::rename(staged, target, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot move " + staged.string() + " to " + target.string() +
                                    ": " + ec.message());
  }
}

struct StagingGuard {
  fs::path path;
  bool armed = true;
  ~StagingGuard() {
    if (!armed) return;
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

template <typename F>
auto parse_json(const std::string& text, const char* what, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad ") + what + ": " + e.what());
  }
}

void apply_profile_overrides(const json& j, Profile& p) {
  if (j.contains("profile")) p = profile_from_name(j.at("profile").get<std::string>());
  p.views = j.value("views", p.views);
  p.width = j.value("width", p.width);
  p.height = j.value("height", p.height);
  if (j.contains("levels")) p.levels = j.at("levels").get<std::vector<int>>();
}

}  // namespace

Profile desk_profile() { return {"desk", 21, 96, 64, {1, 2, 3}}; }

Profile full_profile() { return {"full", 101, 96, 64, {1, 2, 3, 4, 5, 6}}; }

Profile profile_from_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "full") return full_profile();
  throw Error(ErrorCode::kInvalidArgument, "unknown profile '" + name + "'");
}

GenerateConfig generate_config_from_json(const std::string& text) {
  return parse_json(text, "generate config", [](const json& j) {
    GenerateConfig cfg;
    apply_profile_overrides(j, cfg.profile);
    if (j.contains("scenes")) {
      for (const json& s : j.at("scenes")) {
        SceneEntry e;
        if (s.contains("spec")) {
          e.spec = scene_spec_from_json(s.at("spec").dump());
          e.name = s.value("name", e.spec->name);
          e.spec->name = e.name;
        } else {
          e.name = s.at("name").get<std::string>();
          e.seed = s.at("seed").get<std::uint64_t>();
        }
        cfg.scenes.push_back(std::move(e));
      }
    } else {
      const int count = j.at("scene_count").get<int>();
      const std::uint64_t seed = j.value("seed", std::uint64_t{0});
      char name[32];
      for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof name, "scene_%02d", i);
        cfg.scenes.push_back({name, seed + static_cast<std::uint64_t>(i), std::nullopt});
      }
    }
    return cfg;
  });
}

SceneSpec resolve_spec(const SceneEntry& entry, const Profile& profile) {
  check_name(entry.name);
  if (entry.spec) return *entry.spec;
  return random_scene_spec(entry.name, entry.seed, profile.views, profile.width, profile.height);
}

std::vector<fs::path> generate_dataset(const GenerateConfig& config, const fs::path& root) {
  if (config.scenes.empty()) throw Error(ErrorCode::kInvalidArgument, "no scenes configured");
  std::set<std::string> names;
  std::vector<SceneSpec> specs;
  for (const SceneEntry& e : config.scenes) {
    specs.push_back(resolve_spec(e, config.profile));
    if (!names.insert(e.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate scene name '" + e.name + "'");
    }
  }
  fs::create_directories(root);
  StagingGuard staging{staging_path(root / "scenes")};
  fs::remove_all(staging.path);
  fs::create_directories(staging.path);
  for (const SceneSpec& spec : specs) {
    const Scene scene = generate_scene(spec);
    const fs::path dir = staging.path / spec.name;
    save_light_field(scene.light_field, dir, &scene.depth);
    write_text_file(dir / "scene_spec.json", scene_spec_to_json(spec) + "\n");
  }
  std::vector<fs::path> out;
  for (const SceneSpec& spec : specs) {
    commit(staging.path / spec.name, root / spec.name);
    out.push_back(root / spec.name);
  }
  return out;
}

DistortConfig distort_config_from_json(const std::string& text) {
  return parse_json(text, "distort config", [](const json& j) {
    DistortConfig cfg;
    Profile p = desk_profile();
    apply_profile_overrides(j, p);
    cfg.levels = p.levels;
    if (j.contains("kinds")) {
      cfg.kinds.clear();
      for (const json& k : j.at("kinds")) cfg.kinds.push_back(kind_from_name(k.get<std::string>()));
    }
    if (j.contains("scenes")) cfg.scenes = j.at("scenes").get<std::vector<std::string>>();
    for (int level : cfg.levels) k_for_level(level);
    return cfg;
  });
}

std::vector<std::string> DatasetIndex::scenes() const {
  std::vector<std::string> out;
  for (const IndexEntry& e : conditions) {
    if (std::find(out.begin(), out.end(), e.scene) == out.end()) out.push_back(e.scene);
  }
  return out;
}

const IndexEntry* DatasetIndex::find(const std::string& scene, const std::string& id) const {
  for (const IndexEntry& e : conditions) {
    if (e.scene == scene && e.id == id) return &e;
  }
  return nullptr;
}

std::string index_to_json(const DatasetIndex& index) {
  json conditions = json::array();
  for (const IndexEntry& e : index.conditions) {
    conditions.push_back(
        {{"scene", e.scene}, {"kind", e.kind}, {"level", e.level}, {"id", e.id}, {"path", e.path}});
  }
  json skipped = json::array();
  for (const SkippedEntry& s : index.skipped) {
    skipped.push_back(
        {{"scene", s.scene}, {"kind", s.kind}, {"level", s.level}, {"reason", s.reason}});
  }
  return json{{"conditions", conditions}, {"skipped", skipped}}.dump(2) + "\n";
}

DatasetIndex index_from_json(const std::string& text) {
  return parse_json(text, "dataset index", [](const json& j) {
    DatasetIndex index;
    for (const json& e : j.at("conditions")) {
      index.conditions.push_back({e.at("scene"), e.at("kind"), e.at("level"), e.at("id"),
                                  e.at("path")});
    }
    for (const json& s : j.value("skipped", json::array())) {
      index.skipped.push_back({s.at("scene"), s.at("kind"), s.at("level"), s.at("reason")});
    }
    return index;
  });
}

DatasetIndex load_index(const fs::path& root) {
  const fs::path path = root / kIndexFile;
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no " + path.string());
  return index_from_json(read_text_file(path));
}

std::vector<std::string> list_scenes(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kNotFound, "no directory " + root.string());
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name[0] != '.' && fs::exists(entry.path() / kManifestFile)) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetIndex distort_dataset(const fs::path& source_root, const DistortConfig& config,
                             const fs::path& out_root) {
  std::vector<std::string> scenes = config.scenes.empty() ? list_scenes(source_root) : config.scenes;
  if (scenes.empty()) throw Error(ErrorCode::kNotFound, "no scenes under " + source_root.string());
  for (const std::string& s : scenes) {
    check_name(s);
    if (!fs::exists(source_root / s / kManifestFile)) {
      throw Error(ErrorCode::kNotFound, "scene '" + s + "' not found under " + source_root.string());
    }
  }
  for (const std::string& s : scenes) {
    const Manifest m = manifest_from_json(read_text_file(source_root / s / kManifestFile));
    for (int level : config.levels) {
      const int k = k_for_level(level);
      if (k >= m.angular_count) {
        throw Error(ErrorCode::kInvalidArgument,
                    "level " + std::to_string(level) + " (k=" + std::to_string(k) + ") needs more than " +
                        std::to_string(m.angular_count) + " views in scene '" + s + "'");
      }
    }
  }

  const fs::path target = fs::absolute(out_root).lexically_normal();
  fs::create_directories(target.parent_path());
  StagingGuard staging{staging_path(target)};
  fs::remove_all(staging.path);

  DatasetIndex index;
  for (const std::string& scene : scenes) {
    const LightField lf = load_light_field(source_root / scene);
    const std::optional<DepthMap> depth = load_depth_map(source_root / scene);
    save_light_field(lf, staging.path / scene / "reference");
    index.conditions.push_back({scene, "reference", 0, "reference", scene + "/reference"});
    for (DistortionKind kind : config.kinds) {
      const std::string kname = kind_name(kind);
      for (int level : config.levels) {
        if (kind == DistortionKind::kDQ && !depth) {
          index.skipped.push_back({scene, kname, level, "no depth available"});
          continue;
        }
        DistortionSpec spec;
        spec.kind = kind;
        spec.level = level;
        const LightField out = apply(spec, lf, depth ? &*depth : nullptr);
        const std::string rel = scene + "/" + kname + "/level_" + std::to_string(level);
        save_light_field(out, staging.path / rel);
        index.conditions.push_back({scene, kname, level, Condition{kname, level}.id(), rel});
      }
    }
  }
  write_text_file(staging.path / kIndexFile, index_to_json(index));
  commit(staging.path, target);
  staging.armed = false;
  return index;
}

}  // namespace lfqa
