#pragma once

#include <span>

namespace amab {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample stdev / sqrt(n); 0 when n < 2
  long n = 0;
};

MeanSe mean_se(std::span<const double> values);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

// One-sided paired t test of mean(a - b) > 0. Returns the p-value.
double paired_t_test_greater(std::span<const double> a, std::span<const double> b);

}  // namespace amab
