#include "lfqa/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "lfqa/error.hpp"

namespace lfqa {

using nlohmann::json;

namespace {

const CsvRow kMetricHeader = {"scene", "distortion_kind", "level", "metric_id", "pooled",
                              "unbounded"};
const CsvRow kJodHeader = {"scene", "condition", "jod", "ci_low", "ci_high", "variance"};
const CsvRow kComparisonHeader = {"observer_id", "scene", "cond_i", "cond_j", "winner"};

int parse_int(const std::string& s) {
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kFormat, "bad integer '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw Error(ErrorCode::kFormat, "bad flag '" + s + "'");
}

}  // namespace

std::string write_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].find_first_of(",\"\r\n") != std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "CSV field '" + row[i] + "' needs quoting");
      }
      if (i > 0) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  emit(table.header);
  for (const CsvRow& row : table.rows) emit(row);
  return out;
}

CsvTable read_csv(const std::string& text, const CsvRow& expected_header) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    CsvRow row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(row);
      if (!expected_header.empty() && table.header != expected_header) {
        throw Error(ErrorCode::kFormat, "unexpected CSV header");
      }
      first = false;
      continue;
    }
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kFormat, "CSV line " + std::to_string(line_no) + " has " +
                                          std::to_string(row.size()) + " fields, expected " +
                                          std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (first) throw Error(ErrorCode::kFormat, "CSV has no header");
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kFormat, "bad number '" + s + "'");
  }
  return v;
}

std::string MetricRow::condition_id() const { return Condition{distortion_kind, level}.id(); }

std::string metric_rows_to_csv(std::vector<MetricRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
    return std::tie(a.scene, a.distortion_kind, a.level, a.metric_id) <
           std::tie(b.scene, b.distortion_kind, b.level, b.metric_id);
  });
  CsvTable t{kMetricHeader, {}};
  for (const MetricRow& r : rows) {
    t.rows.push_back({r.scene, r.distortion_kind, std::to_string(r.level), r.metric_id,
                      format_double(r.pooled), r.unbounded ? "1" : "0"});
  }
  return write_csv(t);
}

std::vector<MetricRow> metric_rows_from_csv(const std::string& text) {
  std::vector<MetricRow> rows;
  for (const CsvRow& r : read_csv(text, kMetricHeader).rows) {
    rows.push_back({r[0], r[1], parse_int(r[2]), r[3], parse_double(r[4]), parse_bool(r[5])});
  }
  return rows;
}

std::string jod_rows_to_csv(std::vector<JodRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const JodRow& a, const JodRow& b) {
    return std::tie(a.scene, a.condition) < std::tie(b.scene, b.condition);
  });
  CsvTable t{kJodHeader, {}};
  for (const JodRow& r : rows) {
    t.rows.push_back({r.scene, r.condition, format_double(r.jod), format_double(r.ci_low),
                      format_double(r.ci_high), format_double(r.variance)});
  }
  return write_csv(t);
}

std::vector<JodRow> jod_rows_from_csv(const std::string& text) {
  std::vector<JodRow> rows;
  for (const CsvRow& r : read_csv(text, kJodHeader).rows) {
    rows.push_back({r[0], r[1], parse_double(r[2]), parse_double(r[3]), parse_double(r[4]),
                    parse_double(r[5])});
  }
  return rows;
}

std::string comparison_rows_to_csv(const std::vector<ComparisonRow>& rows) {
  CsvTable t{kComparisonHeader, {}};
  for (const ComparisonRow& r : rows) {
    t.rows.push_back({r.observer_id, r.scene, r.cond_i, r.cond_j, r.winner});
  }
  return write_csv(t);
}

std::vector<ComparisonRow> comparison_rows_from_csv(const std::string& text) {
  std::vector<ComparisonRow> rows;
  for (const CsvRow& r : read_csv(text, kComparisonHeader).rows) {
    rows.push_back({r[0], r[1], r[2], r[3], r[4]});
  }
  return rows;
}

std::map<std::string, ComparisonMatrix> comparison_matrices(
    const std::vector<ComparisonRow>& rows) {
  std::map<std::string, ComparisonMatrix> out;
  for (const ComparisonRow& r : rows) {
    if (r.winner != r.cond_i && r.winner != r.cond_j) {
      throw Error(ErrorCode::kFormat, "winner '" + r.winner + "' is neither compared condition");
    }
    auto [it, fresh] = out.try_emplace(r.scene);
    if (fresh) it->second = make_comparison_matrix({"reference"});
    ComparisonMatrix& cm = it->second;
    const int i = cm.intern(r.cond_i);
    const int j = cm.intern(r.cond_j);
    cm.add(r.observer_id, i, j, r.winner == r.cond_i ? i : j);
  }
  return out;
}

std::vector<JodRow> jod_rows(const std::string& scene, const JodScale& scale) {
  std::vector<JodRow> rows;
  for (std::size_t c = 0; c < scale.condition_ids.size(); ++c) {
    rows.push_back({scene, scale.condition_ids[c], scale.jod[c], scale.ci_low[c],
                    scale.ci_high[c], scale.variance[c]});
  }
  return rows;
}

std::vector<EvalPoint> join_points(const std::vector<MetricRow>& metrics,
                                   const std::vector<JodRow>& jods,
                                   const std::string& metric_id) {
  std::map<std::pair<std::string, std::string>, const JodRow*> by_key;
  for (const JodRow& j : jods) by_key[{j.scene, j.condition}] = &j;
  std::vector<EvalPoint> points;
  for (const MetricRow& m : metrics) {
    if (m.metric_id != metric_id || m.level == 0) continue;
    const std::string cond = m.condition_id();
    const auto it = by_key.find({m.scene, cond});
    if (it == by_key.end()) {
      throw Error(ErrorCode::kNotFound, "no JOD for " + m.scene + "/" + cond);
    }
    if (m.unbounded) {
      throw Error(ErrorCode::kOutOfRange, metric_id + " unbounded for " + m.scene + "/" + cond);
    }
    points.push_back({m.scene, cond, m.pooled, it->second->jod, it->second->variance});
  }
  std::sort(points.begin(), points.end(), [](const EvalPoint& a, const EvalPoint& b) {
    return std::tie(a.scene, a.condition) < std::tie(b.scene, b.condition);
  });
  return points;
}

std::string goodness_to_csv(const std::vector<GoodnessEntry>& entries) {
  CsvTable t{{"metric_id", "reference", "fold_id", "n_points", "chi2_red", "pearson", "spearman",
              "mse", "monotone", "a1", "a2", "a3", "a4", "a5"},
             {}};
  for (const GoodnessEntry& e : entries) {
    for (const GoodnessReport& r : e.cv.folds) {
      CsvRow row = {e.metric_id,           e.reference,           std::to_string(r.fold_id),
                    std::to_string(r.n_points), format_double(r.chi2_red), format_double(r.pearson),
                    format_double(r.spearman),  format_double(r.mse),      r.monotone ? "1" : "0"};
      for (double a : r.params.a) row.push_back(format_double(a));
      t.rows.push_back(std::move(row));
    }
  }
  return write_csv(t);
}

namespace {

json summary_json(const Summary& s) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"mean", num(s.mean)}, {"standard_error", num(s.standard_error)}};
}

json cv_json(const CrossValidation& cv) {
  json folds = json::array();
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const GoodnessReport& r : cv.folds) {
    folds.push_back({{"fold_id", r.fold_id},
                     {"n_points", r.n_points},
                     {"chi2_red", num(r.chi2_red)},
                     {"pearson", num(r.pearson)},
                     {"spearman", num(r.spearman)},
                     {"mse", num(r.mse)},
                     {"monotone", r.monotone},
                     {"params", r.params.a}});
  }
  return {{"folds", folds},
          {"chi2_red", summary_json(cv.chi2_red)},
          {"pearson", summary_json(cv.pearson)},
          {"spearman", summary_json(cv.spearman)},
          {"mse", summary_json(cv.mse)}};
}

}  // namespace

std::string goodness_summary_json(const std::vector<GoodnessEntry>& entries) {
  json out = json::array();
  for (const GoodnessEntry& e : entries) {
    json j = cv_json(e.cv);
    j["metric_id"] = e.metric_id;
    j["reference"] = e.reference;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string sparse_reference_to_csv(const std::vector<SparseReferenceRow>& rows) {
  CsvTable t{{"metric_id", "pearson_dense", "pearson_sparse", "pearson_approx", "se_dense",
              "se_sparse", "se_approx", "chi2_dense", "chi2_sparse", "chi2_approx",
              "p_dense_over_sparse", "p_approx_over_sparse", "dense_significant",
              "approx_significant"},
             {}};
  for (const SparseReferenceRow& r : rows) {
    t.rows.push_back({metric_name(r.metric), format_double(r.dense.pearson.mean),
                      format_double(r.sparse.pearson.mean), format_double(r.approx.pearson.mean),
                      format_double(r.dense.pearson.standard_error),
                      format_double(r.sparse.pearson.standard_error),
                      format_double(r.approx.pearson.standard_error),
                      format_double(r.dense.chi2_red.mean), format_double(r.sparse.chi2_red.mean),
                      format_double(r.approx.chi2_red.mean), format_double(r.p_dense_over_sparse),
                      format_double(r.p_approx_over_sparse), r.dense_significant ? "1" : "0",
                      r.approx_significant ? "1" : "0"});
  }
  return write_csv(t);
}

}  // namespace lfqa
