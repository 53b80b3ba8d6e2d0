#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

#include "gwi/rng.hpp"

namespace gwi::dist {

/// Immigration law with P(B = 0) = 1 - c and P(B >= k) = c k^-alpha, k >= 1.
class ImmigrationLaw {
 public:
  /// Number of series terms summed exactly for the mean; the rest of the
  /// zeta tail is taken from an Euler-Maclaurin integral correction.
  static constexpr std::int64_t kMeanSeriesCutoff = 1'000'000;

  ImmigrationLaw(double alpha, double c);

  double alpha() const { return alpha_; }
  double c() const { return c_; }
  double mean() const { return mu_b_; }

  /// P(B >= k).
  double survival_at_least(std::int64_t k) const;

 private:
  double alpha_;
  double c_;
  double mu_b_;
};

/// sum_{k>=1} k^-alpha: direct sum up to `cutoff`, then the integral tail with
/// the first two Euler-Maclaurin corrections.
double zeta_series(double alpha, std::int64_t cutoff);

enum class OffspringFamily { bernoulli, poisson, geometric };

std::string_view to_string(OffspringFamily f);
OffspringFamily parse_offspring_family(std::string_view name);

/// Offspring law keyed by family and mean. Geometric is supported on {0,1,...}.
class OffspringLaw {
 public:
  OffspringLaw(OffspringFamily family, double mu_a);

  OffspringFamily family() const { return family_; }
  double mean() const { return mu_a_; }
  double variance() const { return sigma2_; }

 private:
  OffspringFamily family_;
  double mu_a_;
  double sigma2_;
};

struct AggregateDraw {
  std::int64_t total_offspring = 0;
  std::int64_t parent_count = 0;
};

/// Inverse-CDF immigration draw from a uniform u in (0, 1).
///
/// Returns the largest k >= 1 with c k^-alpha >= 1 - u, or 0 when 1 - u > c.
/// Comparisons treat values within a few ulps as ties so that u sitting on a
/// CDF jump resolves to the upper atom.
std::int64_t sample_immigration(const ImmigrationLaw& law, double u);

inline std::int64_t sample_immigration(const ImmigrationLaw& law, Rng& rng) {
  return sample_immigration(law, uniform_open(rng));
}

/// Sum of `parents` i.i.d. offspring counts via the closed-form aggregate law
/// (binomial, Poisson or negative binomial); O(1) in `parents`.
AggregateDraw sample_aggregate_offspring(const OffspringLaw& law, std::int64_t parents,
                                         Rng& rng);

/// One offspring draw; used by tests to build naive sums.
std::int64_t sample_offspring(const OffspringLaw& law, Rng& rng);

// Karamata truncated-moment diagnostics.

enum class KaramataForm {
  lower,  ///< x^b P(X>x) / E[X^b 1{X<=x}], requires b >= alpha
  upper,  ///< x^b P(X>x) / E[X^b 1{X>x}],  requires b < alpha
};

/// Limit of the ratio as x grows: (b - alpha)/alpha or (alpha - b)/alpha.
double karamata_limit(double beta, double alpha, KaramataForm form);

/// x^beta * survival(x) / truncated_moment(x). The form defaults to lower
/// when beta >= alpha and upper otherwise.
double karamata_ratio(double beta, double alpha, double x,
                      const std::function<double(double)>& survival,
                      const std::function<double(double)>& truncated_moment);
double karamata_ratio(double beta, double alpha, double x,
                      const std::function<double(double)>& survival,
                      const std::function<double(double)>& truncated_moment,
                      KaramataForm form);

}  // namespace gwi::dist
