#include "lfqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "lfqa/distort.hpp"
#include "lfqa/error.hpp"
#include "lfqa/optimize.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/stats.hpp"

namespace lfqa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

// Median of pairwise slopes over pairs with distinct o.
double theil_sen_slope(std::span<const FitPoint> points) {
  std::vector<double> slopes;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[j].o - points[i].o;
      if (dx != 0.0) slopes.push_back((points[j].jod - points[i].jod) / dx);
    }
  }
  return slopes.empty() ? 0.0 : median(std::move(slopes));
}

FitParams to_params(const std::vector<double>& x) {
  FitParams p;
  std::copy(x.begin(), x.end(), p.a.begin());
  return p;
}

}  // namespace

double logistic(double o, const FitParams& p) {
  const auto& a = p.a;
  // 1/2 - 1/(1 + e^t) == tanh(t/2)/2, which saturates cleanly at +-1/2.
  return a[0] * 0.5 * std::tanh(0.5 * a[1] * (o - a[2])) + a[3] * o + a[4];
}

bool is_monotone(const FitParams& p) {
  const double s = p.a[0] * p.a[1];
  const double b = p.a[3];
  if (s == 0.0 || b == 0.0) return true;
  return (s > 0.0) == (b > 0.0) && std::abs(b) >= std::abs(s) / 4.0;
}

const char* loss_name(FitLoss loss) { return loss == FitLoss::kChi2 ? "chi2" : "mse"; }

FitLoss loss_from_name(const std::string& name) {
  if (name == "chi2") return FitLoss::kChi2;
  if (name == "mse") return FitLoss::kMse;
  throw Error(ErrorCode::kInvalidArgument, "unknown fit loss '" + name + "'");
}

double fit_loss(std::span<const FitPoint> points, const FitParams& p, FitLoss loss) {
  double sum = 0.0;
  for (const FitPoint& pt : points) {
    const double r = logistic(pt.o, p) - pt.jod;
    sum += loss == FitLoss::kChi2 ? r * r / pt.var : r * r;
  }
  return sum;
}

std::vector<FitParams> logistic_starts(std::span<const FitPoint> points) {
  std::vector<double> o;
  std::vector<double> jod;
  for (const FitPoint& pt : points) {
    o.push_back(pt.o);
    jod.push_back(pt.jod);
  }
  const double sigma_o = std::sqrt(sample_variance(o));
  const auto [jlo, jhi] = std::minmax_element(jod.begin(), jod.end());
  const double range = *jhi - *jlo;
  const double a3 = median(o);
  const double slope = theil_sen_slope(points);

  std::vector<FitParams> starts;
  for (double a1 : {0.0, range}) {
    for (double a2 : {1.0 / sigma_o, -1.0 / sigma_o}) {
      for (double a4 : {slope, 0.0}) {
        std::vector<double> resid;
        for (const FitPoint& pt : points) resid.push_back(pt.jod - a4 * pt.o);
        FitParams p;
        p.a = {a1, a2, a3, a4, median(std::move(resid))};
        starts.push_back(p);
      }
    }
  }
  return starts;
}

FitParams fit_logistic(std::span<const FitPoint> points, FitLoss loss) {
  if (points.size() < 6) {
    throw Error(ErrorCode::kInvalidArgument, "logistic fit needs at least 6 points");
  }
  const auto [olo, ohi] = std::minmax_element(
      points.begin(), points.end(), [](const FitPoint& a, const FitPoint& b) { return a.o < b.o; });
  if (olo->o == ohi->o) throw Error(ErrorCode::kInvalidArgument, "metric output constant");
  for (const FitPoint& pt : points) {
    if (!std::isfinite(pt.o) || !std::isfinite(pt.jod)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite fit point");
    }
    if (loss == FitLoss::kChi2 && !(pt.var > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "chi2 fit needs positive variances");
    }
  }

  const std::vector<FitParams> starts = logistic_starts(points);
  const auto objective = [&](const std::vector<double>& x) {
    const double v = fit_loss(points, to_params(x), loss);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  double jod_range = 0.0;
  {
    double lo = points[0].jod, hi = points[0].jod;
    for (const FitPoint& pt : points) lo = std::min(lo, pt.jod), hi = std::max(hi, pt.jod);
    jod_range = std::max(hi - lo, 1e-3);
  }
  const double sigma_o = std::abs(1.0 / starts[0].a[1]);

  FitParams best = starts[0];
  double best_loss = std::numeric_limits<double>::infinity();
  for (const FitParams& s : starts) {
    NelderMeadOptions nm;
    nm.initial_step = {0.5 * jod_range, 0.5 / sigma_o, 0.5 * sigma_o,
                       0.25 * jod_range / sigma_o, 0.25 * jod_range};
    std::vector<double> x(s.a.begin(), s.a.end());
    OptimizeResult r = minimize_nelder_mead(objective, x, nm);
    // One restart from the optimum shakes off a collapsed simplex.
    for (double& step : nm.initial_step) step *= 0.1;
    const OptimizeResult polished = minimize_nelder_mead(objective, r.x, nm);
    if (polished.value <= r.value) r = polished;
    const double start_loss = objective(x);
    if (start_loss < r.value) r = {x, start_loss, 0, true};
    if (r.value < best_loss) {
      best_loss = r.value;
      best = to_params(r.x);
    }
  }
  return best;
}

double chi2_red(std::span<const FitPoint> points, const FitParams& p) {
  if (points.size() <= 5) {
    throw Error(ErrorCode::kInvalidArgument, "chi2_red needs more than 5 points");
  }
  for (const FitPoint& pt : points) {
    if (!(pt.var > 0.0)) throw Error(ErrorCode::kInvalidArgument, "chi2_red needs var > 0");
  }
  return fit_loss(points, p, FitLoss::kChi2) / static_cast<double>(points.size() - 5);
}

Correlations correlations(std::span<const FitPoint> points, const FitParams& p) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "correlations need at least 3 points");
  }
  std::vector<double> q;
  std::vector<double> jod;
  for (const FitPoint& pt : points) {
    q.push_back(logistic(pt.o, p));
    jod.push_back(pt.jod);
  }
  Correlations c;
  if (sample_variance(q) == 0.0 || sample_variance(jod) == 0.0) {
    c.defined = false;
    c.pearson = c.spearman = kNaN;
    return c;
  }
  c.pearson = pearson(q, jod);
  c.spearman = spearman(q, jod);
  return c;
}

GoodnessReport evaluate_fold(std::span<const FitPoint> train, std::span<const FitPoint> test,
                             FitLoss loss, int fold_id) {
  GoodnessReport r;
  r.fold_id = fold_id;
  r.params = fit_logistic(train, loss);
  r.n_points = static_cast<int>(test.size());
  // Undefined without positive variances; the fit itself may still be mse.
  const bool weighted = std::all_of(test.begin(), test.end(), [](const FitPoint& q) { return q.var > 0.0; });
  r.chi2_red = weighted ? chi2_red(test, r.params) : std::numeric_limits<double>::quiet_NaN();
  r.mse = fit_loss(test, r.params, FitLoss::kMse) / static_cast<double>(test.size());
  const Correlations c = correlations(test, r.params);
  r.pearson = c.pearson;
  r.spearman = c.spearman;
  r.correlation_defined = c.defined;
  r.monotone = is_monotone(r.params);
  return r;
}

std::vector<Fold> make_folds(std::vector<std::string> scenes, int per_fold, std::uint64_t seed) {
  if (per_fold < 1) throw Error(ErrorCode::kInvalidArgument, "folds need at least one scene");
  std::sort(scenes.begin(), scenes.end());
  if (std::adjacent_find(scenes.begin(), scenes.end()) != scenes.end()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate scene name");
  }
  if (static_cast<int>(scenes.size()) < 2 * per_fold) {
    throw Error(ErrorCode::kInvalidArgument, "too few scenes for two folds");
  }
  Rng rng(seed);
  for (std::size_t i = scenes.size(); i > 1; --i) std::swap(scenes[i - 1], scenes[rng.below(i)]);
  std::vector<Fold> folds;
  const int count = static_cast<int>(scenes.size()) / per_fold;
  for (int f = 0; f < count; ++f) {
    Fold fold;
    fold.id = f;
    fold.test_scenes.assign(scenes.begin() + f * per_fold, scenes.begin() + (f + 1) * per_fold);
    folds.push_back(std::move(fold));
  }
  for (std::size_t i = static_cast<std::size_t>(count * per_fold); i < scenes.size(); ++i) {
    folds.back().test_scenes.push_back(scenes[i]);
  }
  return folds;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return {kNaN, kNaN};
  s.mean = mean(values);
  s.standard_error = values.size() < 2
                         ? 0.0
                         : std::sqrt(sample_variance(values) / static_cast<double>(values.size()));
  return s;
}

CrossValidation cross_validate(std::span<const EvalPoint> points, const std::vector<Fold>& folds,
                               FitLoss loss) {
  std::set<std::string> known;
  for (const EvalPoint& p : points) known.insert(p.scene);
  std::map<std::string, int> fold_of;
  for (const Fold& f : folds) {
    for (const std::string& s : f.test_scenes) {
      if (!known.count(s)) throw Error(ErrorCode::kNotFound, "fold references unknown scene '" + s + "'");
      if (!fold_of.emplace(s, f.id).second) {
        throw Error(ErrorCode::kInvalidArgument, "scene '" + s + "' is in more than one fold");
      }
    }
  }
  for (const std::string& s : known) {
    if (!fold_of.count(s)) {
      throw Error(ErrorCode::kInvalidArgument, "scene '" + s + "' is in no test fold");
    }
  }

  CrossValidation cv;
  std::vector<double> chi2, rho, srho, mse;
  for (const Fold& f : folds) {
    std::vector<FitPoint> train;
    std::vector<FitPoint> test;
    for (const EvalPoint& p : points) {
      (fold_of[p.scene] == f.id ? test : train).push_back({p.o, p.jod, p.var});
    }
    GoodnessReport r = evaluate_fold(train, test, loss, f.id);
    chi2.push_back(r.chi2_red);
    mse.push_back(r.mse);
    if (r.correlation_defined) {
      rho.push_back(r.pearson);
      srho.push_back(r.spearman);
    }
    cv.folds.push_back(r);
  }
  cv.chi2_red = summarize(chi2);
  cv.pearson = summarize(rho);
  cv.spearman = summarize(srho);
  cv.mse = summarize(mse);
  return cv;
}

double bootstrap_one_tailed_p(std::span<const double> a, std::span<const double> b,
                              int replicates, std::uint64_t seed) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "paired bootstrap needs equal non-empty samples");
  }
  if (replicates < 1) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs replicates");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
  Rng rng(seed);
  int not_greater = 0;
  for (int r = 0; r < replicates; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) sum += d[rng.below(d.size())];
    if (sum <= 0.0) ++not_greater;
  }
  return static_cast<double>(not_greater) / replicates;
}

const char* reference_name(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::kDense: return "dense";
    case ReferenceKind::kSparse: return "sparse";
    case ReferenceKind::kApprox: return "approx";
  }
  return "?";
}

ReferenceSet build_references(const LightField& dense, int reference_level) {
  ReferenceSet refs;
  refs.dense = dense;
  DistortionSpec spec;
  spec.level = reference_level;
  spec.kind = DistortionKind::kNN;
  refs.sparse = apply(spec, dense, nullptr);
  spec.kind = DistortionKind::kOpt;
  refs.approx = apply(spec, dense, nullptr);
  return refs;
}

void add_sparse_points(const StudyScene& scene, const SparseReferenceConfig& cfg,
                       SparsePoints& acc) {
  constexpr int kRefs = 3;
  acc.points.resize(cfg.metric_ids.size());
  acc.scenes.push_back(scene.name);
  const ReferenceSet refs = build_references(scene.dense, cfg.reference_level);
  const LightField* ref_of[kRefs] = {&refs.dense, &refs.sparse, &refs.approx};
  for (const StudyCondition& c : scene.conditions) {
    if (c.level <= cfg.reference_level) continue;
    for (int r = 0; r < kRefs; ++r) {
      const std::vector<MetricScore> scores =
          run_battery(*ref_of[r], c.light_field, cfg.metrics, cfg.metric_ids);
      for (std::size_t m = 0; m < scores.size(); ++m) {
        if (!std::isfinite(scores[m].pooled)) {
          throw Error(ErrorCode::kOutOfRange,
                      std::string(metric_name(cfg.metric_ids[m])) + " unbounded for '" +
                          scene.name + "/" + c.id + "' against the " +
                          reference_name(static_cast<ReferenceKind>(r)) + " reference");
        }
        acc.points[m][r].push_back({scene.name, c.id, scores[m].pooled, c.jod, c.var});
      }
    }
  }
}

std::vector<SparseReferenceRow> sparse_reference_table(const SparsePoints& acc,
                                                       const SparseReferenceConfig& cfg) {
  const std::vector<Fold> folds = make_folds(acc.scenes, cfg.folds_per_test, cfg.seed);
  std::vector<SparseReferenceRow> rows;
  for (std::size_t m = 0; m < cfg.metric_ids.size(); ++m) {
    SparseReferenceRow row;
    row.metric = cfg.metric_ids[m];
    row.dense = cross_validate(acc.points[m][0], folds, cfg.loss);
    row.sparse = cross_validate(acc.points[m][1], folds, cfg.loss);
    row.approx = cross_validate(acc.points[m][2], folds, cfg.loss);
    auto fold_rho = [](const CrossValidation& cv) {
      std::vector<double> v;
      for (const GoodnessReport& r : cv.folds) v.push_back(r.correlation_defined ? r.pearson : 0.0);
      return v;
    };
    const std::vector<double> dense = fold_rho(row.dense);
    const std::vector<double> sparse = fold_rho(row.sparse);
    const std::vector<double> approx = fold_rho(row.approx);
    const std::uint64_t seed = hash_combine(cfg.seed, m);
    row.p_dense_over_sparse = bootstrap_one_tailed_p(dense, sparse, cfg.bootstrap, seed);
    row.p_approx_over_sparse =
        bootstrap_one_tailed_p(approx, sparse, cfg.bootstrap, hash_combine(seed, 1));
    row.dense_significant = row.p_dense_over_sparse < cfg.alpha;
    row.approx_significant = row.p_approx_over_sparse < cfg.alpha;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SparseReferenceRow> sparse_reference_study(const std::vector<StudyScene>& scenes,
                                                       const SparseReferenceConfig& cfg) {
  SparsePoints acc;
  for (const StudyScene& scene : scenes) add_sparse_points(scene, cfg, acc);
  return sparse_reference_table(acc, cfg);
}

}  // namespace lfqa
