#include "gwi/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gwi {

ModelParams::ModelParams(dist::OffspringLaw offspring, dist::ImmigrationLaw immigration)
    : offspring_(offspring),
      immigration_(immigration),
      theta_(1.0 - std::pow(offspring.mean(), immigration.alpha())) {}

std::string_view to_string(InitMode mode) {
  switch (mode) {
    case InitMode::series: return "series";
    case InitMode::burn_in: return "burn-in";
    case InitMode::fixed: return "fixed";
  }
  return "unknown";
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "series") return InitMode::series;
  if (name == "burn-in") return InitMode::burn_in;
  if (name == "fixed") return InitMode::fixed;
  throw std::invalid_argument("unknown init mode '" + std::string(name) + "'");
}

Step Chain::step() {
  Step s;
  s.previous = state_;
  s.offspring = dist::sample_aggregate_offspring(params_->offspring(), state_, *rng_).total_offspring;
  s.immigrants = dist::sample_immigration(params_->immigration(), *rng_);
  if (__builtin_add_overflow(s.offspring, s.immigrants, &s.current)) throw TailOverflow();
  s.residual = (static_cast<double>(s.offspring) - params_->mu_a() * static_cast<double>(s.previous)) +
               (static_cast<double>(s.immigrants) - params_->mu_b());
  state_ = s.current;
  return s;
}

int series_terms(const ModelParams& params, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("stationary init: tol must lie in (0, 1)");
  const double mu = params.mu_a();
  double remainder = params.mu_b() * mu / (1.0 - mu);
  int terms = 0;
  while (!(remainder < tol)) {
    remainder *= mu;
    ++terms;
  }
  return terms;
}

std::int64_t stationary_init(const ModelParams& params, double tol, Rng& rng) {
  const int terms = series_terms(params, tol);
  Chain chain(params, dist::sample_immigration(params.immigration(), rng), rng);
  for (int i = 0; i < terms; ++i) chain.step();
  return chain.state();
}

int default_burn_in(const ModelParams& params) {
  return static_cast<int>(std::ceil(64.0 / std::abs(std::log(params.mu_a()))));
}

std::int64_t burn_in_init(const ModelParams& params, int steps, Rng& rng) {
  Chain chain(params, 0, rng);
  for (int i = 0; i < steps; ++i) chain.step();
  return chain.state();
}

Trajectory simulate(const ModelParams& params, std::size_t n, std::int64_t init, Rng& rng) {
  if (n < 1) throw std::invalid_argument("simulate: horizon must be at least 1");
  if (init < 0) throw std::invalid_argument("simulate: negative initial population");
  Trajectory traj;
  traj.x.reserve(n + 1);
  traj.m.reserve(n);
  traj.offspring.reserve(n);
  traj.x.push_back(init);
  Chain chain(params, init, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const Step s = chain.step();
    traj.x.push_back(s.current);
    traj.m.push_back(s.residual);
    traj.offspring.push_back(s.offspring);
  }
  return traj;
}

Trajectory simulate_stationary(const ModelParams& params, std::size_t n, std::uint64_t seed,
                               std::uint64_t index, InitMode init) {
  Rng rng = make_stream(seed, index);
  std::int64_t x0 = 0;
  switch (init) {
    case InitMode::series: x0 = stationary_init(params, 1e-6, rng); break;
    case InitMode::burn_in: x0 = burn_in_init(params, default_burn_in(params), rng); break;
    case InitMode::fixed: break;
  }
  Trajectory traj = simulate(params, n, x0, rng);
  traj.seed = stream_seed(seed, index);
  traj.init = init;
  return traj;
}

std::string_view to_string(ScalingMode mode) {
  return mode == ScalingMode::analytic ? "analytic" : "empirical";
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "analytic") return ScalingMode::analytic;
  if (name == "empirical" || name == "empirical-quantile") return ScalingMode::empirical_quantile;
  throw std::invalid_argument("unknown a_n mode '" + std::string(name) + "'");
}

ScalingInfo scaling(const ModelParams& params, std::size_t n, ScalingMode mode,
                    std::optional<std::span<const std::int64_t>> sample) {
  if (n < 1) throw std::invalid_argument("scaling: n must be positive");
  ScalingInfo info{n, 0.0, mode, params.theta()};
  if (mode == ScalingMode::analytic) {
    info.a_n = std::pow(static_cast<double>(n) * params.c() / params.theta(), 1.0 / params.alpha());
    return info;
  }
  if (!sample || sample->size() < 10 * n) throw std::invalid_argument("insufficient tail sample");
  std::vector<std::int64_t> work(sample->begin(), sample->end());
  // Lower p-quantile: smallest value v with F_emp(v) >= p.
  const double p = 1.0 - 1.0 / static_cast<double>(n);
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(work.size())));
  rank = std::clamp<std::size_t>(rank, 1, work.size());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(rank - 1), work.end());
  info.a_n = std::max(1.0, static_cast<double>(work[rank - 1]));
  return info;
}

}  // namespace gwi
