#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfqa/light_field.hpp"
#include "lfqa/metrics.hpp"

namespace lfqa {

// q(o) = a1 {1/2 - 1/(1 + exp[a2 (o - a3)])} + a4 o + a5, stored as a[0..4].
struct FitParams {
  std::array<double, 5> a{};
};

double logistic(double o, const FitParams& p);

// Monotone in o: a1*a2 and a4 share sign (or one is 0) and |a4| >= |a1*a2|/4.
bool is_monotone(const FitParams& p);

struct FitPoint {
  double o = 0.0;
  double jod = 0.0;
  double var = 1.0;
};

enum class FitLoss { kChi2, kMse };

const char* loss_name(FitLoss loss);
FitLoss loss_from_name(const std::string& name);

// Sum of w_i (q(o_i) - jod_i)^2 with w_i = 1/var_i (chi2) or 1 (mse).
double fit_loss(std::span<const FitPoint> points, const FitParams& p, FitLoss loss);

// The eight deterministic simplex starting points.
std::vector<FitParams> logistic_starts(std::span<const FitPoint> points);

FitParams fit_logistic(std::span<const FitPoint> points, FitLoss loss);

// (1/(n-5)) sum (q(o_i) - jod_i)^2 / var_i.
double chi2_red(std::span<const FitPoint> points, const FitParams& p);

struct Correlations {
  double pearson = 0.0;
  double spearman = 0.0;
  // False when either series is constant; the values are then NaN.
  bool defined = true;
};
Correlations correlations(std::span<const FitPoint> points, const FitParams& p);

struct GoodnessReport {
  int fold_id = 0;
  double chi2_red = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  double mse = 0.0;
  int n_points = 0;
  bool correlation_defined = true;
  bool monotone = false;
  FitParams params;
};

// Fits on `train` and scores the fit on `test`.
GoodnessReport evaluate_fold(std::span<const FitPoint> train, std::span<const FitPoint> test,
                             FitLoss loss, int fold_id = 0);

struct Fold {
  int id = 0;
  std::vector<std::string> test_scenes;
};

// Seeded partition of the scenes into folds of `per_fold` test scenes; a
// leftover scene joins the last fold.
std::vector<Fold> make_folds(std::vector<std::string> scenes, int per_fold, std::uint64_t seed);

// One metric's output for one distorted condition joined with its JOD.
struct EvalPoint {
  std::string scene;
  std::string condition;
  double o = 0.0;
  double jod = 0.0;
  double var = 1.0;
};

struct Summary {
  double mean = 0.0;
  double standard_error = 0.0;
};
Summary summarize(std::span<const double> values);

struct CrossValidation {
  std::vector<GoodnessReport> folds;
  Summary chi2_red;
  Summary pearson;
  Summary spearman;
  Summary mse;
};

CrossValidation cross_validate(std::span<const EvalPoint> points, const std::vector<Fold>& folds,
                               FitLoss loss);

// One-tailed paired bootstrap over folds: the fraction of resampled mean
// differences mean(a - b) that are <= 0. Small values mean a > b.
double bootstrap_one_tailed_p(std::span<const double> a, std::span<const double> b,
                              int replicates, std::uint64_t seed);

// Sparse-reference experiment: each test condition scored against the dense
// reference, against the NN-reconstructed sparse reference and against the
// OPT-reconstructed one.
struct StudyCondition {
  std::string id;
  int level = 0;
  LightField light_field;
  double jod = 0.0;
  double var = 1.0;
};

struct StudyScene {
  std::string name;
  LightField dense;
  std::vector<StudyCondition> conditions;
};

struct SparseReferenceConfig {
  MetricConfig metrics;
  std::vector<MetricId> metric_ids = {MetricId::kPsnr, MetricId::kSsim2d};
  // Severity level whose subsampling defines the sparse reference.
  int reference_level = 2;
  FitLoss loss = FitLoss::kChi2;
  std::uint64_t seed = 0;
  int folds_per_test = 2;
  int bootstrap = 2000;
  double alpha = 0.05;
};

enum class ReferenceKind { kDense, kSparse, kApprox };
const char* reference_name(ReferenceKind kind);

struct SparseReferenceRow {
  MetricId metric = MetricId::kPsnr;
  CrossValidation dense;
  CrossValidation sparse;
  CrossValidation approx;
  // One-tailed p-values on fold Pearson scores.
  double p_dense_over_sparse = 1.0;
  double p_approx_over_sparse = 1.0;
  bool dense_significant = false;
  bool approx_significant = false;
};

// The three references of one scene.
struct ReferenceSet {
  LightField dense;
  LightField sparse;
  LightField approx;
};
ReferenceSet build_references(const LightField& dense, int reference_level);

// Scores accumulated scene by scene, so light fields need not all be held
// in memory at once.
struct SparsePoints {
  std::vector<std::string> scenes;
  // points[m][r]: metric cfg.metric_ids[m] against reference kind r.
  std::vector<std::array<std::vector<EvalPoint>, 3>> points;
};
// Scores the scene's conditions above the reference level.
void add_sparse_points(const StudyScene& scene, const SparseReferenceConfig& cfg,
                       SparsePoints& acc);
std::vector<SparseReferenceRow> sparse_reference_table(const SparsePoints& acc,
                                                       const SparseReferenceConfig& cfg);

std::vector<SparseReferenceRow> sparse_reference_study(const std::vector<StudyScene>& scenes,
                                                       const SparseReferenceConfig& cfg);

}  // namespace lfqa
