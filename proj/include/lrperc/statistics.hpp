#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lrperc {

double mean(const std::vector<double>& x);
// Standard error of the mean (sample sd / sqrt(n)); 0 for n < 2.
double standard_error(const std::vector<double>& x);
double quantile(std::vector<double> x, double q);

struct Interval {
  double lo = 0;
  double hi = 0;
};

// Percentile bootstrap of `statistic` over resampled indices 0..n-1.
Interval bootstrap_percentile(std::size_t n,
                              const std::function<double(const std::vector<std::size_t>&)>& statistic,
                              int resamples, double level, std::uint64_t seed,
                              std::uint64_t stream);

// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

// Two-sample homogeneity test on count histograms (value -> frequency);
// sparse bins are pooled until every expected count is at least 5.
ChiSquare chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                const std::vector<std::uint64_t>& b);
// Sum of independent chi-square tests.
ChiSquare combine(const std::vector<ChiSquare>& tests);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
  std::vector<double> residuals;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lrperc
