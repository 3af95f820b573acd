#pragma once

#include <map>
#include <string>
#include <vector>

#include "lfqa/eval.hpp"
#include "lfqa/scaling.hpp"

namespace lfqa {

// Minimal CSV: comma separated, no quoting. Writers reject fields that
// contain commas, quotes or line breaks.
using CsvRow = std::vector<std::string>;
struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
};
std::string write_csv(const CsvTable& table);
// Throws kFormat when the header differs from `expected_header` (if given)
// or a row has the wrong number of fields.
CsvTable read_csv(const std::string& text, const CsvRow& expected_header = {});

// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& s);

struct MetricRow {
  std::string scene;
  std::string distortion_kind;  // "reference" for the undistorted condition
  int level = 0;
  std::string metric_id;
  double pooled = 0.0;
  bool unbounded = false;

  std::string condition_id() const;
  bool operator==(const MetricRow&) const = default;
};

struct JodRow {
  std::string scene;
  std::string condition;
  double jod = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double variance = 0.0;

  bool operator==(const JodRow&) const = default;
};

// One 2AFC trial; `winner` repeats cond_i or cond_j.
struct ComparisonRow {
  std::string observer_id;
  std::string scene;
  std::string cond_i;
  std::string cond_j;
  std::string winner;

  bool operator==(const ComparisonRow&) const = default;
};

std::string metric_rows_to_csv(std::vector<MetricRow> rows);
std::vector<MetricRow> metric_rows_from_csv(const std::string& text);
std::string jod_rows_to_csv(std::vector<JodRow> rows);
std::vector<JodRow> jod_rows_from_csv(const std::string& text);
// Keeps the given order; trial order matters to nobody but is preserved.
std::string comparison_rows_to_csv(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> comparison_rows_from_csv(const std::string& text);

// One matrix per scene with "reference" at index 0.
std::map<std::string, ComparisonMatrix> comparison_matrices(const std::vector<ComparisonRow>& rows);

std::vector<JodRow> jod_rows(const std::string& scene, const JodScale& scale);

// Joins metric rows of one metric with JOD rows on (scene, condition). The
// reference condition is left out; it carries no uncertainty. Throws
// kNotFound when a metric row has no JOD.
std::vector<EvalPoint> join_points(const std::vector<MetricRow>& metrics,
                                   const std::vector<JodRow>& jods, const std::string& metric_id);

struct GoodnessEntry {
  std::string metric_id;
  std::string reference = "dense";
  CrossValidation cv;
};
std::string goodness_to_csv(const std::vector<GoodnessEntry>& entries);
std::string goodness_summary_json(const std::vector<GoodnessEntry>& entries);
std::string sparse_reference_to_csv(const std::vector<SparseReferenceRow>& rows);

}  // namespace lfqa
