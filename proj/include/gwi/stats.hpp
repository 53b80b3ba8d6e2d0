#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gwi::stats {

struct KsResult {
  double distance = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov distance with its asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// sup_x |F_emp(x) - cdf(x)| for a continuous reference cdf.
double ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// sup over `grid` of |cdf_values[k] - F_emp(grid[k])|.
double sup_cdf_gap(std::span<const double> sample, std::span<const double> grid,
                   std::span<const double> cdf_values);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  ///< unbiased

/// Standard error of the mean from non-overlapping batch means.
double batch_means_stderr(std::span<const double> v, std::size_t batches = 50);

/// Median (copies the input).
double median(std::span<const double> v);

double normal_cdf(double x, double sigma = 1.0);

}  // namespace gwi::stats
