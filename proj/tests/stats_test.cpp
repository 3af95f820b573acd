#include <gtest/gtest.h>

#include <cmath>

#include "lfqa/error.hpp"
#include "lfqa/optimize.hpp"
#include "lfqa/stats.hpp"

namespace lfqa {
namespace {

TEST(Stats, NormalQuantileInvertsCdf) {
  for (double p : {1e-10, 0.001, 0.02, 0.3, 0.5, 0.75, 0.99, 1 - 1e-9}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(1.0, p / 1e-3));
  }
  EXPECT_THROW(normal_quantile(1.0), Error);
}

TEST(Stats, LogCdfContinuousAcrossTailSwitch) {
  EXPECT_NEAR(log_normal_cdf(-29.999), log_normal_cdf(-30.001), 0.1);
  EXPECT_NEAR(normal_hazard(-29.999), normal_hazard(-30.001), 1e-2);
  EXPECT_TRUE(std::isfinite(log_normal_cdf(-200.0)));
}

TEST(Stats, PercentileInterpolatesLikeNumpy) {
  // numpy.percentile([1, 2, 3, 4], [25, 2.5]) == [1.75, 1.075]
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_NEAR(percentile({4, 1, 3, 2}, 0.025), 1.075, 1e-12);
}

TEST(Stats, CorrelationsOnKnownSeries) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 5, 4, 5};
  // scipy.stats.pearsonr -> 0.7745966692414834; spearmanr -> 0.7378647873726218
  EXPECT_NEAR(pearson(x, y), 0.7745966692414834, 1e-12);
  EXPECT_NEAR(spearman(x, y), 0.7378647873726218, 1e-12);
  const std::vector<double> ranks = average_ranks(y);
  EXPECT_EQ(ranks, (std::vector<double>{1, 2.5, 4.5, 2.5, 4.5}));
}

TEST(Optimize, BfgsFindsRosenbrockMinimum) {
  const OptimizeResult r = minimize_bfgs(
      [](const std::vector<double>& x, std::vector<double>& g) {
        const double a = 1 - x[0];
        const double b = x[1] - x[0] * x[0];
        g = {-2 * a - 400 * x[0] * b, 200 * b};
        return a * a + 100 * b * b;
      },
      {-1.2, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(Optimize, NelderMeadFindsQuadraticMinimum) {
  const OptimizeResult r = minimize_nelder_mead(
      [](const std::vector<double>& x) {
        return (x[0] - 3) * (x[0] - 3) + 10 * (x[1] + 1) * (x[1] + 1) + (x[2] - 0.5) * (x[2] - 0.5);
      },
      {0.0, 0.0, 0.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 3.0, 1e-5);
  EXPECT_NEAR(r.x[1], -1.0, 1e-5);
  EXPECT_NEAR(r.x[2], 0.5, 1e-5);
}

}  // namespace
}  // namespace lfqa
