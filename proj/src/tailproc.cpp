#include "gwi/tailproc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "gwi/parallel.hpp"
#include "gwi/stats.hpp"

namespace gwi::tail {

TailPath sample_tail_path(double alpha, double mu_a, int m, Rng& rng) {
  if (m < 0) throw std::invalid_argument("tail path: window must be non-negative");
  if (!(mu_a > 0.0 && mu_a < 1.0)) throw std::invalid_argument("tail path: mu_A must lie in (0, 1)");
  TailPath path;
  path.m = m;
  path.y0 = std::pow(uniform_open(rng), -1.0 / alpha);
  // P(K >= k) = mu^{alpha k}.
  path.k = static_cast<std::int64_t>(std::floor(std::log(uniform_open(rng)) / (alpha * std::log(mu_a))));
  path.y.resize(static_cast<std::size_t>(2 * m + 1));
  for (int i = -m; i <= m; ++i) {
    const bool alive = i >= 0 || path.k >= -i;
    path.y[static_cast<std::size_t>(i + m)] = alive ? std::pow(mu_a, i) * path.y0 : 0.0;
  }
  return path;
}

double forward_tail_normalizer(double alpha, double sigma_a2) {
  const double p = 2.0 * alpha / 3.0;
  const double sigma = std::sqrt(sigma_a2);
  const double inside = std::erf(1.0 / (sigma * std::sqrt(2.0)));
  // 2 int_1^inf z^p phi_sigma(z) dz = sigma^p 2^{p/2} Gamma((p+1)/2, 1/(2 sigma^2)) / sqrt(pi).
  const double outside = std::pow(sigma, p) * std::pow(2.0, p / 2.0) *
                         boost::math::tgamma((p + 1.0) / 2.0, 1.0 / (2.0 * sigma_a2)) /
                         std::sqrt(M_PI);
  return inside + outside;
}

ForwardTailSampler::ForwardTailSampler(double alpha, double mu_a, double sigma_a2)
    : alpha_(alpha), mu_a_(mu_a), sigma_(std::sqrt(sigma_a2)), power_(2.0 * alpha / 3.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("forward tail: alpha must be positive");
  if (!(sigma_a2 > 0.0)) throw std::invalid_argument("forward tail: sigma_A^2 must be positive");
  // On |z| <= 1 the ratio peaks at 0; on z >= 1 its log is concave, so a
  // golden-section search over a bounded interval finds the maximum.
  double lo = 1.0, hi = 1.0 + 40.0 * sigma_ * kProposalWidth;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (ratio(a) < ratio(b)) lo = a; else hi = b;
  }
  envelope_ = std::max({ratio(0.0), ratio(1.0), ratio(0.5 * (lo + hi))}) * (1.0 + 1e-12);
}

double ForwardTailSampler::ratio(double z) const {
  const double kappa = (1.0 - 1.0 / (kProposalWidth * kProposalWidth)) / (2.0 * sigma_ * sigma_);
  const double w = std::pow(std::max(1.0, std::abs(z)), power_);
  return kProposalWidth * w * std::exp(-kappa * z * z);
}

double ForwardTailSampler::sample_z0(Rng& rng) const {
  std::normal_distribution<double> proposal(0.0, kProposalWidth * sigma_);
  for (;;) {
    const double z = proposal(rng);
    if (uniform_open(rng) * envelope_ <= ratio(z)) return z;
  }
}

ForwardTailXM ForwardTailSampler::sample(int m, Rng& rng) const {
  if (m < 0) throw std::invalid_argument("forward tail: window must be non-negative");
  ForwardTailXM out;
  out.z0 = sample_z0(rng);
  const double pareto = std::pow(uniform_open(rng), -1.0 / power_);
  out.ytilde = pareto / std::max(1.0, std::abs(out.z0));
  std::normal_distribution<double> normal(0.0, sigma_);
  out.path.reserve(static_cast<std::size_t>(m + 1));
  for (int k = 0; k <= m; ++k) {
    const double scale = std::pow(mu_a_, 1.5 * k) * out.ytilde;
    const double z = k == 0 ? out.z0 : normal(rng);
    out.path.emplace_back(scale, scale * z);
  }
  return out;
}

ForwardTailXM sample_forward_tail_xm(double alpha, double mu_a, double sigma_a2, int m, Rng& rng) {
  return ForwardTailSampler(alpha, mu_a, sigma_a2).sample(m, rng);
}

PseudoTailReport validate_pseudo_tail(const ModelParams& params, const PseudoTailConfig& config) {
  const int m = std::max(config.m, 1);
  Rng rng = make_stream(config.seed, 0);
  std::vector<std::int64_t> x;
  x.reserve(config.steps + 1);
  Chain chain(params, stationary_init(params, 1e-6, rng), rng);
  x.push_back(chain.state());
  for (std::size_t i = 0; i < config.steps; ++i) x.push_back(chain.step().current);

  PseudoTailReport report;
  if (config.threshold) {
    report.threshold = *config.threshold;
  } else {
    std::vector<std::int64_t> work(x);
    auto rank = static_cast<std::size_t>(std::ceil(config.quantile * static_cast<double>(work.size())));
    rank = std::clamp<std::size_t>(rank, 1, work.size());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(rank - 1), work.end());
    report.threshold = std::max(1.0, static_cast<double>(work[rank - 1]));
  }
  const double thr = report.threshold;
  const double mu = params.mu_a(), mu_b = params.mu_b();
  auto residual = [&](std::size_t k) {  // M_k
    return static_cast<double>(x[k]) - mu * static_cast<double>(x[k - 1]) - mu_b;
  };

  std::vector<double> w0, ratio, x0_scaled;
  std::vector<double> lag_sums(static_cast<std::size_t>(m), 0.0);
  std::vector<double> cluster_sums(config.cluster_radii.size(), 0.0);
  std::size_t backward = 0;
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t j = mm; j + mm + 1 < x.size(); ++j) {
    if (!(static_cast<double>(x[j]) > thr)) continue;
    const double xj = static_cast<double>(x[j]);
    w0.push_back(residual(j + 1) / std::sqrt(std::max(xj, 1.0)));
    ratio.push_back(static_cast<double>(x[j + 1]) / xj);
    x0_scaled.push_back(xj / thr);
    if (static_cast<double>(x[j - 1]) > thr) ++backward;
    for (std::size_t i = 1; i <= mm; ++i) lag_sums[i - 1] += static_cast<double>(x[j + i]) / xj;
    for (std::size_t r = 0; r < config.cluster_radii.size(); ++r) {
      const auto radius = static_cast<std::size_t>(config.cluster_radii[r]);
      int hits = 0;
      for (std::size_t i = 1; i <= radius; ++i) {
        if (j >= i && static_cast<double>(x[j - i]) > thr) ++hits;
        if (j + i < x.size() && static_cast<double>(x[j + i]) > thr) ++hits;
      }
      cluster_sums[r] += hits;
    }
    if (config.keep_samples) {
      ConditionalSample s;
      for (std::size_t k = j - mm; k <= j + mm; ++k) s.x_scaled.push_back(static_cast<double>(x[k]) / thr);
      for (std::size_t i = 0; i <= mm; ++i)
        s.w.push_back(residual(j + i + 1) / std::sqrt(std::max(static_cast<double>(x[j + i]), 1.0)));
      report.samples.push_back(std::move(s));
    }
  }
  report.events = w0.size();
  if (report.events < std::max<std::size_t>(config.min_events, 2))
    throw std::runtime_error("insufficient conditioning events");

  const double n_ev = static_cast<double>(report.events);
  const double sigma = std::sqrt(params.sigma_a2());
  const double alpha = params.alpha();
  report.ks_w0 = stats::ks_one_sample(w0, [&](double v) { return stats::normal_cdf(v, sigma); });
  report.ratio_mean = stats::mean(ratio);
  report.ratio_sd = std::sqrt(stats::variance(ratio));
  report.ratio_stderr = report.ratio_sd / std::sqrt(n_ev);
  report.ks_pareto = stats::ks_one_sample(
      x0_scaled, [&](double y) { return y <= 1.0 ? 0.0 : 1.0 - std::pow(y, -alpha); });
  report.backward_exceedance = static_cast<double>(backward) / n_ev;
  for (double s : lag_sums) report.lag_ratio_means.push_back(s / n_ev);
  for (std::size_t r = 0; r < config.cluster_radii.size(); ++r)
    report.cluster_counts.emplace_back(config.cluster_radii[r], cluster_sums[r] / n_ev);
  return report;
}

double laplace_analytic(double alpha, double mu_a, double eps, double s) {
  if (!(eps > 0.0)) throw std::invalid_argument("laplace: eps must be positive");
  const double theta = 1.0 - std::pow(mu_a, alpha);
  const double q = std::pow(mu_a, alpha);
  double total = 0.0;
  double weight = 1.0;  // mu^{alpha (k-1)}
  for (int k = 1; weight > 1e-18; ++k) {
    // Band mass under alpha y^{-alpha-1} dy: eps^-alpha mu^{alpha(k-1)} (1 - mu^alpha).
    total += -std::expm1(-s * k) * weight * (1.0 - q);
    weight *= q;
  }
  return theta * std::pow(eps, -alpha) * total;
}

LaplaceReport laplace_functional_gap(const ModelParams& params, const LaplaceConfig& config) {
  if (config.reps < 2) throw std::invalid_argument("laplace: need at least two replications");
  LaplaceReport report;
  report.a_n = config.a_n ? *config.a_n : scaling(params, config.n, ScalingMode::analytic).a_n;
  const double level = config.eps * report.a_n;
  report.counts.assign(config.reps, 0);
  parallel_for(config.reps, config.workers, [&](std::size_t rep) {
    Rng rng = make_stream(config.seed, rep);
    Chain chain(params, stationary_init(params, 1e-6, rng), rng);
    std::int64_t count = 0;
    for (std::size_t j = 0; j < config.n; ++j)
      if (static_cast<double>(chain.step().current) > level) ++count;
    report.counts[rep] = count;
  });

  const std::size_t reps = config.reps;
  for (double s : config.s_values) {
    auto functional = [&](auto index_of) {
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sum += std::exp(-s * static_cast<double>(report.counts[index_of(r)]));
      return -std::log(sum / static_cast<double>(reps));
    };
    LaplaceLine line;
    line.s = s;
    line.empirical = functional([](std::size_t r) { return r; });
    line.analytic = laplace_analytic(params.alpha(), params.mu_a(), config.eps, s);
    // Same resampling stream for every s.
    Rng boot = make_stream(config.seed, 0xb007ULL << 40);
    std::uniform_int_distribution<std::size_t> pick(0, reps - 1);
    std::vector<double> replicates;
    replicates.reserve(config.bootstrap);
    std::vector<std::size_t> idx(reps);
    for (std::size_t b = 0; b < config.bootstrap; ++b) {
      for (auto& v : idx) v = pick(boot);
      replicates.push_back(functional([&](std::size_t r) { return idx[r]; }));
    }
    line.stderr_boot = replicates.size() > 1 ? std::sqrt(stats::variance(replicates)) : 0.0;
    line.gap = std::abs(line.empirical - line.analytic);
    report.lines.push_back(line);
  }
  return report;
}

}  // namespace gwi::tail
