#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "gwi/distributions.hpp"
#include "gwi/rng.hpp"

namespace gwi {

/// Subcritical Galton-Watson process with regularly varying immigration.
class ModelParams {
 public:
  ModelParams(dist::OffspringLaw offspring, dist::ImmigrationLaw immigration);

  const dist::OffspringLaw& offspring() const { return offspring_; }
  const dist::ImmigrationLaw& immigration() const { return immigration_; }

  double alpha() const { return immigration_.alpha(); }
  double mu_a() const { return offspring_.mean(); }
  double sigma_a2() const { return offspring_.variance(); }
  double mu_b() const { return immigration_.mean(); }
  double c() const { return immigration_.c(); }

  /// 1 - mu_A^alpha: probability that a large value starts its cluster.
  double theta() const { return theta_; }
  double stationary_mean() const { return mu_b() / (1.0 - mu_a()); }

 private:
  dist::OffspringLaw offspring_;
  dist::ImmigrationLaw immigration_;
  double theta_;
};

/// Thrown when a generation would exceed the int64 range; replications that
/// hit it are recorded as "tail overflow" instead of silently wrapping.
class TailOverflow : public std::overflow_error {
 public:
  TailOverflow() : std::overflow_error("tail overflow: population exceeds int64 range") {}
};

enum class InitMode { series, burn_in, fixed };
std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view name);

/// One transition X_{i-1} -> X_i with its decomposition.
struct Step {
  std::int64_t previous = 0;
  std::int64_t offspring = 0;
  std::int64_t immigrants = 0;
  std::int64_t current = 0;
  double residual = 0.0;  ///< M_i = (offspring - mu_A X_{i-1}) + (B_i - mu_B)
};

/// Streaming form of the recursion; the state lives here, the engine is borrowed.
class Chain {
 public:
  Chain(const ModelParams& params, std::int64_t start, Rng& rng)
      : params_(&params), rng_(&rng), state_(start) {}

  Step step();
  std::int64_t state() const { return state_; }

 private:
  const ModelParams* params_;
  Rng* rng_;
  std::int64_t state_;
};

/// Realized path X_0..X_n with residuals M_1..M_n and offspring totals.
struct Trajectory {
  std::vector<std::int64_t> x;          ///< size n + 1
  std::vector<double> m;                ///< m[i-1] = M_i, size n
  std::vector<std::int64_t> offspring;  ///< offspring[i-1] = sum of A_j^{(i)}, size n
  std::uint64_t seed = 0;
  InitMode init = InitMode::fixed;

  std::size_t horizon() const { return m.size(); }
  /// M_i for i in 1..n.
  double residual(std::size_t i) const { return m[i - 1]; }
};

/// Smallest I with mu_B mu_A^{I+1} / (1 - mu_A) < tol.
int series_terms(const ModelParams& params, double tol);

/// Approximate stationary draw from the truncated thinning series
/// B_0 + sum_{i=1}^{I} (i-fold thinning of B_{-i}).
///
/// The series is evaluated by the equivalent forward recursion
/// Y <- thin(Y) + B started from B_{-I}: thinning a sum splits into
/// independent thinnings of its parts, so both have the same law.
std::int64_t stationary_init(const ModelParams& params, double tol, Rng& rng);

/// Default burn-in length ceil(64 / |log mu_A|).
int default_burn_in(const ModelParams& params);
std::int64_t burn_in_init(const ModelParams& params, int steps, Rng& rng);

Trajectory simulate(const ModelParams& params, std::size_t n, std::int64_t init, Rng& rng);

/// Convenience: stationary start (series, tol 1e-6) on stream (seed, index).
Trajectory simulate_stationary(const ModelParams& params, std::size_t n, std::uint64_t seed,
                               std::uint64_t index = 0, InitMode init = InitMode::series);

enum class ScalingMode { analytic, empirical_quantile };
std::string_view to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(std::string_view name);

struct ScalingInfo {
  std::size_t n = 0;
  double a_n = 0.0;
  ScalingMode mode = ScalingMode::analytic;
  double theta = 0.0;
};

/// Scaling sequence a_n with n P(X_0 > a_n) ~ 1.
///
/// analytic: (n c / theta)^{1/alpha}. empirical_quantile: max(1, lower
/// (1 - 1/n)-quantile of `sample`), which must hold at least 10 n draws.
ScalingInfo scaling(const ModelParams& params, std::size_t n, ScalingMode mode,
                    std::optional<std::span<const std::int64_t>> sample = std::nullopt);

}  // namespace gwi
