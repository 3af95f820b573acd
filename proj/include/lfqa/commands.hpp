#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfqa/dataset.hpp"
#include "lfqa/eval.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/report.hpp"

namespace lfqa {

// Library side of the CLI subcommands; the tool only parses flags and writes
// files.

struct MeasureOptions {
  std::filesystem::path dataset_root;
  std::vector<MetricId> metrics = all_metrics();
  MetricConfig config;
  // CSV in the metric-report schema whose rows are merged into the output.
  std::optional<std::filesystem::path> external_scores;
};

// Runs the battery on every indexed condition (the reference included)
// against its scene's reference.
std::vector<MetricRow> measure_dataset(const MeasureOptions& options);

// A directory is read as study-server session logs, a file as comparison CSV.
std::vector<ComparisonRow> load_comparisons(const std::filesystem::path& input,
                                            int* corrupt_lines = nullptr);

// Scales every scene with bootstrap intervals. Throws on empty input.
std::vector<JodRow> scale_comparisons(const std::vector<ComparisonRow>& rows, int bootstrap,
                                      std::uint64_t seed);

struct EvaluateOptions {
  // Empty: every metric present in the report.
  std::vector<std::string> metrics;
  // "chi2", "mse" or "auto" (chi2 when every variance is positive).
  std::string loss = "auto";
  std::uint64_t seed = 0;
  int scenes_per_fold = 2;
};

std::vector<GoodnessEntry> evaluate_report(const std::vector<MetricRow>& report,
                                           const std::vector<JodRow>& jods,
                                           const EvaluateOptions& options);

// Sparse-reference comparison over a distorted dataset tree; JODs come from
// `jods` keyed by (scene, condition).
std::vector<SparseReferenceRow> evaluate_sparse_reference(
    const std::filesystem::path& dataset_root, const std::vector<JodRow>& jods,
    const SparseReferenceConfig& config);

// Single-line, machine-parsable form used by the CLI: "error: <code>: <message>".
std::string format_error(const std::exception& e);

}  // namespace lfqa
