#pragma once

#include <span>
#include <vector>

namespace eventlens {

double mean(std::span<const double> x);
/// Sample variance with divisor n - 1. Zero for n < 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);
/// Linear-interpolation quantile (R type 7) of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double prob);
/// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace eventlens
