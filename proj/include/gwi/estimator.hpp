#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "gwi/model.hpp"

namespace gwi::est {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// CLS estimate of mu_A with known mu_B.
///
/// mu_hat = cross / denominator with cross = sum X_{i-1}(X_i - mu_B) and
/// denominator = sum X_{i-1}^2; undefined when the denominator is zero.
struct ClsResult {
  double mu_hat = 0.0;
  double cross = 0.0;
  double denominator = 0.0;
  bool defined = false;
};

ClsResult cls_estimate(std::span<const std::int64_t> x, double mu_b);

/// sum X_{i-1} M_i / sum X_{i-1}^2 from stored residuals, i.e. mu_hat - mu_A
/// without the cancellation of subtracting mu_A afterwards.
std::optional<double> cls_error(const Trajectory& traj);

/// Normalized sums over j = 1..n: v1 = a_n^-2 sum X_j^2, v2 = a_n^-3/2 sum X_j M_{j+1}.
struct PartialSumPair {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// Uses n = horizon - 1, so a trajectory simulated to horizon n + 1 supplies
/// M_{j+1} for every j in 1..n.
PartialSumPair partial_sums(const Trajectory& traj, double a_n);

/// Exact sum of squares when it fits in 128 bits.
std::optional<unsigned __int128> sum_squares_exact(std::span<const std::int64_t> x);

/// sqrt(a_n) (mu_hat - mu_A). Throws std::domain_error on an undefined estimate.
double scaled_error(const ClsResult& cls, double mu_a, double a_n);

}  // namespace gwi::est
