#include "lfqa/commands.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "lfqa/error.hpp"
#include "lfqa/io.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/scaling.hpp"
#include "lfqa/study.hpp"

namespace lfqa {

namespace fs = std::filesystem;

namespace {

using RowKey = std::tuple<std::string, std::string, int, std::string>;

RowKey key_of(const MetricRow& r) { return {r.scene, r.distortion_kind, r.level, r.metric_id}; }

LightField load_condition(const fs::path& root, const IndexEntry& e) {
  const fs::path dir = root / e.path;
  if (!fs::exists(dir / kManifestFile)) {
    throw Error(ErrorCode::kNotFound, "condition directory " + dir.string() + " missing");
  }
  return load_light_field(dir);
}

}  // namespace

std::vector<MetricRow> measure_dataset(const MeasureOptions& options) {
  validate(options.config);
  const DatasetIndex index = load_index(options.dataset_root);
  // Every directory must exist before any scoring starts.
  for (const IndexEntry& e : index.conditions) {
    if (!fs::exists(options.dataset_root / e.path / kManifestFile)) {
      throw Error(ErrorCode::kNotFound,
                  "condition directory " + (options.dataset_root / e.path).string() + " missing");
    }
  }
  std::vector<MetricRow> external;
  if (options.external_scores) {
    external = metric_rows_from_csv(read_text_file(*options.external_scores));
    for (const MetricRow& r : external) {
      if (index.find(r.scene, r.condition_id()) == nullptr) {
        throw Error(ErrorCode::kNotFound,
                    "external score for unknown condition " + r.scene + "/" + r.condition_id());
      }
    }
  }

  std::vector<MetricRow> rows;
  for (const std::string& scene : index.scenes()) {
    const IndexEntry* ref_entry = index.find(scene, "reference");
    if (ref_entry == nullptr) {
      throw Error(ErrorCode::kNotFound, "scene '" + scene + "' has no reference");
    }
    const LightField ref = load_condition(options.dataset_root, *ref_entry);
    for (const IndexEntry& e : index.conditions) {
      if (e.scene != scene) continue;
      const LightField test = e.level == 0 ? ref : load_condition(options.dataset_root, e);
      for (const MetricScore& s : run_battery(ref, test, options.config, options.metrics)) {
        rows.push_back({scene, e.kind, e.level, metric_name(s.id), s.pooled, s.unbounded});
      }
    }
  }

  std::set<RowKey> seen;
  for (const MetricRow& r : rows) seen.insert(key_of(r));
  for (const MetricRow& r : external) {
    if (!seen.insert(key_of(r)).second) {
      throw Error(ErrorCode::kInvalidArgument, "external score duplicates " + r.scene + "/" +
                                                   r.condition_id() + "/" + r.metric_id);
    }
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(),
            [](const MetricRow& a, const MetricRow& b) { return key_of(a) < key_of(b); });
  return rows;
}

std::vector<ComparisonRow> load_comparisons(const fs::path& input, int* corrupt_lines) {
  if (fs::is_directory(input)) {
    ExportResult r = export_logs(input);
    if (corrupt_lines != nullptr) *corrupt_lines = r.corrupt_lines;
    return std::move(r.rows);
  }
  if (!fs::exists(input)) throw Error(ErrorCode::kNotFound, "no " + input.string());
  if (corrupt_lines != nullptr) *corrupt_lines = 0;
  return comparison_rows_from_csv(read_text_file(input));
}

std::vector<JodRow> scale_comparisons(const std::vector<ComparisonRow>& rows, int bootstrap,
                                      std::uint64_t seed) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "no comparisons to scale");
  std::vector<JodRow> out;
  for (const auto& [scene, cm] : comparison_matrices(rows)) {
    const JodScale scale = bootstrap > 0 ? bootstrap_ci(cm, bootstrap, hash_combine(seed, hash_string(scene)))
                                         : scale_jod(cm);
    const std::vector<JodRow> scene_rows = jod_rows(scene, scale);
    out.insert(out.end(), scene_rows.begin(), scene_rows.end());
  }
  return out;
}

std::vector<GoodnessEntry> evaluate_report(const std::vector<MetricRow>& report,
                                           const std::vector<JodRow>& jods,
                                           const EvaluateOptions& options) {
  std::vector<std::string> metrics = options.metrics;
  if (metrics.empty()) {
    for (const MetricRow& r : report) {
      if (std::find(metrics.begin(), metrics.end(), r.metric_id) == metrics.end()) {
        metrics.push_back(r.metric_id);
      }
    }
  }
  if (metrics.empty()) throw Error(ErrorCode::kInvalidArgument, "metric report is empty");

  std::vector<GoodnessEntry> entries;
  for (const std::string& metric : metrics) {
    const std::vector<EvalPoint> points = join_points(report, jods, metric);
    if (points.empty()) throw Error(ErrorCode::kNotFound, "no scores for metric " + metric);
    FitLoss loss = FitLoss::kChi2;
    if (options.loss == "auto") {
      const bool all_positive = std::all_of(points.begin(), points.end(),
                                            [](const EvalPoint& p) { return p.var > 0.0; });
      loss = all_positive ? FitLoss::kChi2 : FitLoss::kMse;
    } else {
      loss = loss_from_name(options.loss);
    }
    std::vector<std::string> scenes;
    for (const EvalPoint& p : points) {
      if (std::find(scenes.begin(), scenes.end(), p.scene) == scenes.end()) scenes.push_back(p.scene);
    }
    const std::vector<Fold> folds = make_folds(scenes, options.scenes_per_fold, options.seed);
    entries.push_back({metric, "dense", cross_validate(points, folds, loss)});
  }
  return entries;
}

std::vector<SparseReferenceRow> evaluate_sparse_reference(const fs::path& dataset_root,
                                                          const std::vector<JodRow>& jods,
                                                          const SparseReferenceConfig& config) {
  const DatasetIndex index = load_index(dataset_root);
  std::map<std::pair<std::string, std::string>, const JodRow*> by_key;
  for (const JodRow& j : jods) by_key[{j.scene, j.condition}] = &j;

  SparsePoints acc;
  for (const std::string& scene : index.scenes()) {
    const IndexEntry* ref_entry = index.find(scene, "reference");
    if (ref_entry == nullptr) {
      throw Error(ErrorCode::kNotFound, "scene '" + scene + "' has no reference");
    }
    StudyScene study{scene, load_condition(dataset_root, *ref_entry), {}};
    for (const IndexEntry& e : index.conditions) {
      if (e.scene != scene || e.level <= config.reference_level) continue;
      const auto it = by_key.find({scene, e.id});
      if (it == by_key.end()) throw Error(ErrorCode::kNotFound, "no JOD for " + scene + "/" + e.id);
      study.conditions.push_back(
          {e.id, e.level, load_condition(dataset_root, e), it->second->jod, it->second->variance});
    }
    if (study.conditions.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scene '" + scene + "' has no condition above the reference level");
    }
    add_sparse_points(study, config, acc);
  }
  return sparse_reference_table(acc, config);
}

std::string format_error(const std::exception& e) {
  std::string code = "internal";
  if (const auto* err = dynamic_cast<const Error*>(&e)) code = error_code_name(err->code());
  std::string message = e.what();
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::replace(message.begin(), message.end(), '\r', ' ');
  return "error: " + code + ": " + message;
}

}  // namespace lfqa
