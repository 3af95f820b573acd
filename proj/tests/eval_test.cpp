#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lfqa/distort.hpp"
#include "lfqa/error.hpp"
#include "lfqa/eval.hpp"
#include "lfqa/rng.hpp"
#include "test_util.hpp"

namespace lfqa {
namespace {

FitParams params(double a1, double a2, double a3, double a4, double a5) {
  FitParams p;
  p.a = {a1, a2, a3, a4, a5};
  return p;
}

const FitParams kIdentity = params(0, 0, 0, 1, 0);

std::vector<FitPoint> sample(const FitParams& p, int n, double lo, double hi, double var = 1.0) {
  std::vector<FitPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double o = lo + (hi - lo) * i / (n - 1);
    pts.push_back({o, logistic(o, p), var});
  }
  return pts;
}

TEST(Logistic, LinearDegenerate) {
  for (double o : {-3.0, 0.0, 0.7, 12.0}) EXPECT_DOUBLE_EQ(logistic(o, kIdentity), o);
}

TEST(Logistic, MidpointIsLinearPart) {
  const FitParams p = params(3, 2, 1.5, 0.25, -1);
  EXPECT_NEAR(logistic(1.5, p), 0.25 * 1.5 - 1, 1e-15);
}

TEST(Logistic, MatchesExponentialForm) {
  const FitParams p = params(1.7, -0.8, 0.3, 0.2, 0.4);
  for (double o = -5; o <= 5; o += 0.5) {
    const double direct = 1.7 * (0.5 - 1.0 / (1.0 + std::exp(-0.8 * (o - 0.3)))) + 0.2 * o + 0.4;
    EXPECT_NEAR(logistic(o, p), direct, 1e-13);
  }
}

TEST(Logistic, SaturatesWithoutOverflow) {
  // The bracket 1/2 - 1/(1 + e^t) tends to +1/2 as t grows.
  const FitParams p = params(2, 1e6, 0, 0.5, 1);
  EXPECT_DOUBLE_EQ(logistic(3.0, p), 2 * 0.5 + 0.5 * 3 + 1);
  EXPECT_DOUBLE_EQ(logistic(-3.0, p), -2 * 0.5 - 0.5 * 3 + 1);
  EXPECT_TRUE(std::isfinite(logistic(1e300, params(1, 1e10, 0, 0, 0))));
}

TEST(Logistic, MonotoneFlagImpliesMonotone) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const FitParams p = params(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1),
                               rng.uniform(-1, 1), 0);
    if (!is_monotone(p)) continue;
    double prev = logistic(-5, p);
    const double dir = logistic(5, p) >= prev ? 1.0 : -1.0;
    for (double o = -4.9; o <= 5; o += 0.1) {
      const double q = logistic(o, p);
      EXPECT_GE(dir * (q - prev), -1e-12);
      prev = q;
    }
  }
}

TEST(FitLogistic, RecoversKnownParameters) {
  const std::vector<FitPoint> pts = sample(params(2, 1.5, 0, 0.5, -1), 40, -4, 4);
  const FitParams fit = fit_logistic(pts, FitLoss::kMse);
  EXPECT_LT(fit_loss(pts, fit, FitLoss::kMse), 1e-6);
}

TEST(FitLogistic, LinearDataReproduced) {
  std::vector<FitPoint> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({i * 0.5, 2 * (i * 0.5) + 1, 1});
  const FitParams fit = fit_logistic(pts, FitLoss::kChi2);
  for (const FitPoint& p : pts) EXPECT_NEAR(logistic(p.o, fit), p.jod, 1e-6);
}

TEST(FitLogistic, GuardsDegenerateInput) {
  std::vector<FitPoint> few = sample(kIdentity, 5, 0, 1);
  EXPECT_THROW(fit_logistic(few, FitLoss::kMse), Error);
  std::vector<FitPoint> flat(8, FitPoint{3.0, 0.0, 1.0});
  for (int i = 0; i < 8; ++i) flat[i].jod = i;
  try {
    fit_logistic(flat, FitLoss::kMse);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("metric output constant"), std::string::npos);
  }
  std::vector<FitPoint> zero_var = sample(kIdentity, 8, 0, 1, 0.0);
  EXPECT_THROW(fit_logistic(zero_var, FitLoss::kChi2), Error);
  EXPECT_NO_THROW(fit_logistic(zero_var, FitLoss::kMse));
}

TEST(FitLogistic, NeverWorseThanBestStart) {
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    std::vector<FitPoint> pts;
    for (int i = 0; i < 30; ++i) {
      const double o = rng.uniform(10, 40);
      pts.push_back({o, -0.1 * o + rng.normal() * 0.3, rng.uniform(0.05, 0.5)});
    }
    const FitParams fit = fit_logistic(pts, FitLoss::kChi2);
    double best_start = INFINITY;
    for (const FitParams& s : logistic_starts(pts)) {
      best_start = std::min(best_start, fit_loss(pts, s, FitLoss::kChi2));
    }
    EXPECT_LE(fit_loss(pts, fit, FitLoss::kChi2), best_start);
  }
}

TEST(FitLogistic, EightDeterministicStarts) {
  const std::vector<FitPoint> pts = sample(params(1, 1, 0, 0.3, 0), 9, -2, 6);
  const auto starts = logistic_starts(pts);
  ASSERT_EQ(starts.size(), 8u);
  for (const FitParams& s : starts) EXPECT_DOUBLE_EQ(s.a[2], 2.0);  // median o
  const FitParams a = fit_logistic(pts, FitLoss::kMse);
  const FitParams b = fit_logistic(pts, FitLoss::kMse);
  EXPECT_EQ(a.a, b.a);
}

TEST(Chi2Red, ZeroResiduals) {
  EXPECT_EQ(chi2_red(sample(kIdentity, 8, 0, 1, 0.3), kIdentity), 0.0);
}

TEST(Chi2Red, ResidualEqualsVariance) {
  std::vector<FitPoint> pts;
  for (int i = 0; i < 10; ++i) {
    const double var = 0.1 * (i + 1);
    pts.push_back({double(i), i + (i % 2 ? 1 : -1) * std::sqrt(var), var});
  }
  EXPECT_NEAR(chi2_red(pts, kIdentity), 2.0, 1e-12);
}

TEST(Chi2Red, MonteCarloNearOne) {
  Rng rng(2024);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 105; ++i) {
    const double var = rng.uniform(0.05, 1.0);
    pts.push_back({double(i), i + rng.normal() * std::sqrt(var), var});
  }
  const double c = chi2_red(pts, kIdentity);
  EXPECT_GE(c, 0.7);
  EXPECT_LE(c, 1.3);
}

TEST(Chi2Red, OrderInvariantAndGuarded) {
  Rng rng(3);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({rng.uniform(), rng.uniform(), rng.uniform(0.1, 1)});
  const double c = chi2_red(pts, kIdentity);
  std::reverse(pts.begin(), pts.end());
  std::swap(pts[3], pts[11]);
  EXPECT_NEAR(chi2_red(pts, kIdentity), c, 1e-12);
  pts.resize(5);
  EXPECT_THROW(chi2_red(pts, kIdentity), Error);
}

TEST(Correlations, PerfectAndInverted) {
  std::vector<FitPoint> pts = sample(kIdentity, 7, 0, 3);
  Correlations c = correlations(pts, kIdentity);
  EXPECT_NEAR(c.pearson, 1.0, 1e-12);
  EXPECT_NEAR(c.spearman, 1.0, 1e-12);
  for (FitPoint& p : pts) p.jod = -p.jod;
  c = correlations(pts, kIdentity);
  EXPECT_NEAR(c.pearson, -1.0, 1e-12);
  EXPECT_NEAR(c.spearman, -1.0, 1e-12);
}

TEST(Correlations, HandDatasetRanks) {
  // Ranks (1,2,3,4) vs (2,1,4,3): sum d^2 = 4, 1 - 6*4/(4*15) = 0.6.
  const std::vector<FitPoint> pts = {{1, 2, 1}, {2, 1, 1}, {3, 4, 1}, {4, 3, 1}};
  const Correlations c = correlations(pts, kIdentity);
  EXPECT_NEAR(c.spearman, 0.6, 1e-12);
  EXPECT_NEAR(c.pearson, 0.6, 1e-12);
}

TEST(Correlations, ConstantSeriesUndefined) {
  std::vector<FitPoint> pts = sample(kIdentity, 6, 0, 1);
  const Correlations c = correlations(pts, params(0, 0, 0, 0, 2));
  EXPECT_FALSE(c.defined);
  EXPECT_TRUE(std::isnan(c.pearson));
}

TEST(Correlations, SpearmanInvariantUnderCube) {
  Rng rng(8);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 25; ++i) {
    const double o = rng.uniform(-2, 2);
    pts.push_back({o, o + rng.normal() * 0.7, 1});
  }
  const double s = correlations(pts, kIdentity).spearman;
  for (FitPoint& p : pts) p.o = p.o * p.o * p.o;
  EXPECT_NEAR(correlations(pts, kIdentity).spearman, s, 1e-12);
}

std::vector<std::string> scene_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("scene" + std::to_string(i));
  return names;
}

TEST(Folds, FourteenScenesSevenPairs) {
  const std::vector<Fold> folds = make_folds(scene_names(14), 2, 42);
  ASSERT_EQ(folds.size(), 7u);
  std::multiset<std::string> seen;
  for (const Fold& f : folds) {
    EXPECT_EQ(f.test_scenes.size(), 2u);
    seen.insert(f.test_scenes.begin(), f.test_scenes.end());
  }
  EXPECT_EQ(seen.size(), 14u);
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 14u);
  const auto again = make_folds(scene_names(14), 2, 42);
  for (std::size_t i = 0; i < folds.size(); ++i) EXPECT_EQ(folds[i].test_scenes, again[i].test_scenes);
  // Input order does not matter.
  auto reversed = scene_names(14);
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(make_folds(reversed, 2, 42)[0].test_scenes, folds[0].test_scenes);
}

TEST(Folds, OddCountJoinsLastFold) {
  const auto folds = make_folds(scene_names(5), 2, 1);
  ASSERT_EQ(folds.size(), 2u);
  EXPECT_EQ(folds.back().test_scenes.size(), 3u);
}

std::vector<EvalPoint> oracle_points(int scenes, int per_scene, double sign) {
  std::vector<EvalPoint> pts;
  Rng rng(99);
  for (int s = 0; s < scenes; ++s) {
    for (int c = 0; c < per_scene; ++c) {
      const double jod = -rng.uniform(0, 4);
      pts.push_back({"scene" + std::to_string(s), "c" + std::to_string(c), sign * jod, jod,
                     rng.uniform(0.05, 0.3)});
    }
  }
  return pts;
}

TEST(CrossValidate, OraclePerfectOnEveryFold) {
  const auto pts = oracle_points(14, 8, 1.0);
  const CrossValidation cv = cross_validate(pts, make_folds(scene_names(14), 2, 3), FitLoss::kChi2);
  ASSERT_EQ(cv.folds.size(), 7u);
  for (const GoodnessReport& r : cv.folds) {
    EXPECT_EQ(r.n_points, 16);
    EXPECT_LT(r.chi2_red, 1e-9);
    EXPECT_NEAR(r.pearson, 1.0, 1e-9);
    EXPECT_NEAR(r.spearman, 1.0, 1e-12);
  }
  EXPECT_NEAR(cv.pearson.mean, 1.0, 1e-9);
  EXPECT_LT(cv.pearson.standard_error, 1e-9);
}

TEST(CrossValidate, AntiOracleSignAbsorbed) {
  const auto pts = oracle_points(14, 8, -1.0);
  const CrossValidation cv = cross_validate(pts, make_folds(scene_names(14), 2, 3), FitLoss::kMse);
  for (const GoodnessReport& r : cv.folds) {
    EXPECT_NEAR(r.pearson, 1.0, 1e-6);
    EXPECT_LT(logistic(1.0, r.params), logistic(0.0, r.params));
  }
}

TEST(CrossValidate, IdenticalTrainTestOracle) {
  std::vector<FitPoint> pts;
  for (const EvalPoint& p : oracle_points(1, 12, 1.0)) pts.push_back({p.o, p.jod, p.var});
  EXPECT_LT(evaluate_fold(pts, pts, FitLoss::kChi2).chi2_red, 1e-9);
}

TEST(CrossValidate, UnknownOrMissingScene) {
  const auto pts = oracle_points(4, 8, 1.0);
  std::vector<Fold> folds = make_folds(scene_names(4), 2, 0);
  folds[0].test_scenes[0] = "nowhere";
  try {
    cross_validate(pts, folds, FitLoss::kMse);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  folds = make_folds(scene_names(4), 2, 0);
  folds.pop_back();
  EXPECT_THROW(cross_validate(pts, folds, FitLoss::kMse), Error);
}

TEST(Bootstrap, OneTailedDirection) {
  const std::vector<double> hi = {0.9, 0.85, 0.95, 0.9, 0.8, 0.92, 0.88};
  const std::vector<double> lo = {0.7, 0.75, 0.8, 0.6, 0.7, 0.72, 0.78};
  EXPECT_LT(bootstrap_one_tailed_p(hi, lo, 2000, 1), 0.05);
  EXPECT_GT(bootstrap_one_tailed_p(lo, hi, 2000, 1), 0.95);
  EXPECT_EQ(bootstrap_one_tailed_p(hi, hi, 100, 1), 1.0);
}

TEST(SparseReference, ReferencesShareShape) {
  SceneSpec spec = random_scene_spec("s", 4, 21, 32, 16);
  const Scene scene = generate_scene(spec);
  const ReferenceSet refs = build_references(scene.light_field, 2);
  EXPECT_EQ(refs.sparse.view_count(), 21);
  EXPECT_EQ(refs.approx.view_count(), 21);
  EXPECT_NE(refs.sparse.views, refs.dense.views);
  // Kept views are untouched by either reconstruction.
  EXPECT_EQ(refs.sparse.views[0], refs.dense.views[0]);
  EXPECT_EQ(refs.approx.views[20], refs.dense.views[20]);
}

TEST(SparseReference, TableRowPerMetric) {
  std::vector<StudyScene> scenes;
  for (int s = 0; s < 4; ++s) {
    const Scene gen = generate_scene(random_scene_spec("s" + std::to_string(s), s + 1, 21, 24, 16));
    StudyScene study{gen.light_field.manifest.name, gen.light_field, {}};
    for (int level = 3; level <= 5; ++level) {
      for (DistortionKind kind : {DistortionKind::kNN, DistortionKind::kLinear}) {
        DistortionSpec d;
        d.kind = kind;
        d.level = level;
        StudyCondition c;
        c.id = std::string(kind_name(kind)) + "_" + std::to_string(level);
        c.level = level;
        c.light_field = apply(d, gen.light_field, nullptr);
        c.jod = -0.5 * level + 0.1 * (kind == DistortionKind::kLinear) + 0.05 * s;
        c.var = 0.1;
        study.conditions.push_back(std::move(c));
      }
    }
    scenes.push_back(std::move(study));
  }
  SparseReferenceConfig cfg;
  cfg.bootstrap = 200;
  const auto rows = sparse_reference_study(scenes, cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const SparseReferenceRow& r : rows) {
    EXPECT_EQ(r.dense.folds.size(), 2u);
    EXPECT_EQ(r.dense.folds[0].n_points, 12);
    EXPECT_GE(r.p_dense_over_sparse, 0.0);
    EXPECT_LE(r.p_dense_over_sparse, 1.0);
  }
}

}  // namespace
}  // namespace lfqa
