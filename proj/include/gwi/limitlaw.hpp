#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gwi/model.hpp"
#include "gwi/rng.hpp"

namespace gwi::limit {

/// Parameters of the limit pair (V1, V2).
///
/// V1 = (1 - mu_A^2)^-1 sum P_i^2 and V2 = (1 - mu_A^3)^-1/2 sum P_i^{3/2} Z_i,
/// where (P_i) is Poisson with intensity theta d(-y^-alpha) and Z_i ~ N(0, sigma_A^2).
class LimitParams {
 public:
  LimitParams(double alpha, double mu_a, double sigma_a2);
  explicit LimitParams(const ModelParams& model)
      : LimitParams(model.alpha(), model.mu_a(), model.sigma_a2()) {}

  double alpha() const { return alpha_; }
  double mu_a() const { return mu_a_; }
  double sigma_a2() const { return sigma_a2_; }
  double theta() const { return theta_; }
  /// Scale of the (alpha/2)-stable marginal V1.
  double c1() const { return c1_; }
  /// Scale of the symmetric (2 alpha/3)-stable marginal V2.
  double c2() const { return c2_; }

 private:
  double alpha_, mu_a_, sigma_a2_;
  double theta_, c1_, c2_;
};

/// How the points below the truncation level are handled.
enum class Remainder {
  truncate,    ///< drop them
  compensate,  ///< add their mean to V1 and their mean conditional variance to V2
};
std::string_view to_string(Remainder mode);
Remainder parse_remainder(std::string_view name);

struct LimitPair {
  double v1 = 0.0;
  double v2 = 0.0;
  double sum_p2 = 0.0;  ///< over retained points
  double sum_p3 = 0.0;  ///< over retained points
  double trunc_v1_mean_bound = 0.0;
  double trunc_v2_sd_bound = 0.0;
  std::int64_t terms_used = 0;
  bool compensated = false;
};

// Closed-form remainder moments at truncation level eps.

/// E[V1 remainder] = theta alpha eps^{2-alpha} / ((1 - mu^2)(2 - alpha)).
double trunc_v1_mean_bound(const LimitParams& p, double eps);
/// sqrt(E[V2 remainder^2]) = sqrt(theta sigma^2 alpha eps^{3-alpha} / ((1 - mu^3)(3 - alpha))).
double trunc_v2_sd_bound(const LimitParams& p, double eps);
/// SD of the V1 remainder around its mean (what compensation leaves behind).
double residual_v1_sd(const LimitParams& p, double eps);
/// SD of the V2 remainder's conditional variance, in CF-exponent units:
/// sigma^2 SD[sum_{P<=eps} P^3] / (2 (1 - mu^3)).
double residual_v2_scale(const LimitParams& p, double eps);

/// Bound on |E e^{i(s V1 + t V2)} - E e^{i(s V1_eps + t V2_eps)}| for the
/// sampler at level eps: |s| m1 + |t| sd2 when truncating, and
/// s^2 r1^2 + t^4 r2^2 when compensating.
double cf_truncation_slack(const LimitParams& p, double eps, double s, double t, Remainder mode);

/// Largest eps whose remainder bounds (trunc bounds, or the residual bounds
/// when compensating) are all below `target`.
double eps_for_bound(const LimitParams& p, double target, Remainder mode);

/// One draw of (V1, V2) from the Poisson series, P_i = theta^{1/alpha} Gamma_i^{-1/alpha},
/// stopping at the first P_i <= eps.
LimitPair sample_limit_pair(const LimitParams& p, double eps, Rng& rng,
                            Remainder mode = Remainder::truncate);

/// Retained points P_1 > P_2 > ... > eps of one series draw.
std::vector<double> sample_limit_points(const LimitParams& p, double eps, Rng& rng);

/// log E exp{i(s V1 + t V2)} by quadrature (absolute error about 1e-9).
std::complex<double> cf_log_joint(const LimitParams& p, double s, double t);
std::complex<double> cf_joint(const LimitParams& p, double s, double t);

struct MarginalCf {
  std::complex<double> v1;
  double v2 = 1.0;
};

/// Closed-form stable marginals:
/// exp{-C1 |s|^{alpha/2} (1 - i tan(pi alpha/4) sgn s)} and exp{-C2 |t|^{2 alpha/3}}.
MarginalCf cf_marginals(const LimitParams& p, double s, double t);

/// P(V2 / V1 <= x) = 1/2 - (1/pi) int_0^inf Im phi(-u x, u) / u du.
///
/// The two-sided principal-value form collapses to this one-sided integral
/// because phi(-s, -t) = conj(phi(s, t)). The integrand behaves like
/// u^{alpha/2 - 1} at the origin; the substitution u = w^{2/alpha} on (0, 1]
/// removes that singularity. The upper limit is where
/// |phi| <= exp(-C2 u^{2 alpha/3}) < 1e-12.
double cdf_ratio(const LimitParams& p, double x);

/// U = theta^{1/alpha} sum P_i^3 / (sum P_i^2)^2. Requires at least one point.
double u_statistic(const LimitParams& p, std::span<const double> points);
double u_statistic(const LimitParams& p, double sum_p2, double sum_p3);

}  // namespace gwi::limit
