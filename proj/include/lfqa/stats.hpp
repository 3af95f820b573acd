#pragma once

#include <span>
#include <vector>

namespace lfqa {

double normal_pdf(double z);
double normal_cdf(double z);
// log(normal_cdf(z)), accurate far into the lower tail.
double log_normal_cdf(double z);
// d/dz log(normal_cdf(z)).
double normal_hazard(double z);
double normal_quantile(double p);

double mean(std::span<const double> v);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> v);
// Linear interpolation between order statistics (numpy's default), q in [0,1].
double percentile(std::vector<double> v, double q);

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> v);

}  // namespace lfqa
