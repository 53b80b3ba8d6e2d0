#include "gwi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwi::stats {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 0.3) {
    // Alternate series: 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    const double c = -M_PI * M_PI / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) sum += std::exp(c * (2 * k - 1) * (2 * k - 1));
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q(ne * d)};
}

double ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = cdf(x[k]);
    d = std::max({d, std::abs(static_cast<double>(k + 1) / n - f), std::abs(f - static_cast<double>(k) / n)});
  }
  return d;
}

double sup_cdf_gap(std::span<const double> sample, std::span<const double> grid,
                   std::span<const double> cdf_values) {
  if (grid.size() != cdf_values.size()) throw std::invalid_argument("sup_cdf_gap: size mismatch");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto count = std::upper_bound(x.begin(), x.end(), grid[k]) - x.begin();
    d = std::max(d, std::abs(static_cast<double>(count) / n - cdf_values[k]));
  }
  return d;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double m = 0.0;
  std::size_t k = 0;
  for (double x : v) m += (x - m) / static_cast<double>(++k);
  return m;
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("variance: need two values");
  double m = 0.0, s = 0.0;
  std::size_t k = 0;
  for (double x : v) {
    ++k;
    const double d = x - m;
    m += d / static_cast<double>(k);
    s += d * (x - m);
  }
  return s / static_cast<double>(v.size() - 1);
}

double batch_means_stderr(std::span<const double> v, std::size_t batches) {
  if (batches < 2 || v.size() < 2 * batches) throw std::invalid_argument("batch means: too few values");
  const std::size_t len = v.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = mean(v.subspan(b * len, len));
  return std::sqrt(variance(means) / static_cast<double>(batches));
}

double median(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::vector<double> w(v.begin(), v.end());
  const auto mid = w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2);
  std::nth_element(w.begin(), mid, w.end());
  if (w.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(w.begin(), mid);
  return 0.5 * (lo + hi);
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

}  // namespace gwi::stats
