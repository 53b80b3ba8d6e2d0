#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gwi/model.hpp"
#include "gwi/rng.hpp"

namespace gwi::tail {

/// Tail process on lags -m..m: Y_i = mu^i Y_0 for i >= 0 and
/// Y_i = mu^i 1{K >= |i|} Y_0 for i < 0, with Y_0 Pareto(alpha) on [1, inf)
/// and K geometric, P(K = k) = mu^{alpha k} (1 - mu^alpha), independent.
struct TailPath {
  std::vector<double> y;  ///< y[i + m] = Y_i
  int m = 0;
  std::int64_t k = 0;
  double y0 = 1.0;

  double at(int lag) const { return y[static_cast<std::size_t>(lag + m)]; }
};

TailPath sample_tail_path(double alpha, double mu_a, int m, Rng& rng);

/// Forward tail process of (X_k^{3/2}, X_k M_{k+1}):
/// (mu^{3k/2} Y~, mu^{3k/2} Y~ Z~_k) for k = 0..m.
struct ForwardTailXM {
  double ytilde = 0.0;
  double z0 = 0.0;  ///< the size-biased Z~_0
  std::vector<std::pair<double, double>> path;
};

/// E[(1 v |Z|)^{2 alpha/3}] for Z ~ N(0, sigma^2), via the upper incomplete gamma function.
double forward_tail_normalizer(double alpha, double sigma_a2);

/// Draws Z~_0 with density proportional to (1 v |z|)^{2 alpha/3} phi_sigma(z)
/// by rejection from N(0, (2 sigma)^2), then Y~ = Y' / (1 v |Z~_0|) with Y'
/// Pareto(2 alpha/3) on [1, inf).
///
/// Given Z~_0 = z the joint survival function factorizes as
/// P(Y~ > y | z) = (y (1 v |z|) v 1)^{-2 alpha/3}, which is exactly the law of
/// Y'/(1 v |z|); the marginal of Z~_0 is the size-biased normal above.
class ForwardTailSampler {
 public:
  static constexpr double kProposalWidth = 2.0;

  ForwardTailSampler(double alpha, double mu_a, double sigma_a2);

  ForwardTailXM sample(int m, Rng& rng) const;
  double sample_z0(Rng& rng) const;
  /// sup_z of target/proposal density ratio, found by bounded search.
  double envelope() const { return envelope_; }
  double ratio(double z) const;

 private:
  double alpha_, mu_a_, sigma_;
  double power_;  ///< 2 alpha / 3
  double envelope_;
};

ForwardTailXM sample_forward_tail_xm(double alpha, double mu_a, double sigma_a2, int m, Rng& rng);

// Validators tying simulated paths to the tail limits.

struct PseudoTailConfig {
  std::size_t steps = 10'000'000;
  double quantile = 0.999;               ///< threshold = empirical lower quantile
  std::optional<double> threshold;       ///< overrides `quantile` when set
  int m = 3;
  std::size_t min_events = 1000;
  std::uint64_t seed = 42;
  std::vector<int> cluster_radii = {1, 2, 4, 8, 16, 32};
  bool keep_samples = false;
};

struct ConditionalSample {
  std::vector<double> x_scaled;  ///< X_{-m}/x .. X_m/x
  std::vector<double> w;         ///< W'_0 .. W'_m, W'_i = M_{i+1} / sqrt(X_i v 1)
};

struct PseudoTailReport {
  double threshold = 0.0;
  std::size_t events = 0;
  double ks_w0 = 0.0;          ///< KS(W'_0, N(0, sigma_A^2))
  double ratio_mean = 0.0;     ///< mean of X_1/X_0
  double ratio_sd = 0.0;
  double ratio_stderr = 0.0;
  double ks_pareto = 0.0;      ///< KS(X_0/x, Pareto(alpha))
  double backward_exceedance = 0.0;  ///< P(X_{-1} > x | X_0 > x), limit mu^alpha
  std::vector<double> lag_ratio_means;  ///< mean X_i/X_0, i = 1..m; limit mu^i
  /// Mean number of exceedances at lags 1 <= |i| <= r given X_0 > x, per radius.
  std::vector<std::pair<int, double>> cluster_counts;
  std::vector<ConditionalSample> samples;
};

/// Simulates one stationary path and summarizes the law of the rescaled window
/// and the normalized residuals given X_0 above a high threshold.
/// Throws std::runtime_error("insufficient conditioning events") when fewer
/// than `min_events` exceedances occur.
PseudoTailReport validate_pseudo_tail(const ModelParams& params, const PseudoTailConfig& config);

/// theta int (1 - exp(-s #{j >= 0 : y mu^j > eps})) alpha y^{-alpha-1} dy as a
/// sum over the bands (eps mu^{-(k-1)}, eps mu^{-k}] on which the count is k.
double laplace_analytic(double alpha, double mu_a, double eps, double s);

struct LaplaceConfig {
  double eps = 1.0;
  std::vector<double> s_values = {0.5, 1.0, 2.0};
  std::size_t n = 1'000'000;
  std::optional<double> a_n;  ///< defaults to the analytic scaling
  std::size_t reps = 500;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

struct LaplaceLine {
  double s = 0.0;
  double empirical = 0.0;
  double analytic = 0.0;
  double stderr_boot = 0.0;
  double gap = 0.0;
};

struct LaplaceReport {
  double a_n = 0.0;
  std::vector<LaplaceLine> lines;
  std::vector<std::int64_t> counts;  ///< per replication #{j : X_j > eps a_n}
};

/// Laplace functional of the point process of X_j / a_n for f = s 1{x > eps}:
/// empirical -log mean exp(-s N_n) over replications against the limit.
LaplaceReport laplace_functional_gap(const ModelParams& params, const LaplaceConfig& config);

}  // namespace gwi::tail
