#include "gwi/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gwi::dist {

namespace {

constexpr double kTieTolerance = 8.0 * std::numeric_limits<double>::epsilon();

bool at_least(double lhs, double rhs) { return lhs >= rhs * (1.0 - kTieTolerance); }

}  // namespace

double zeta_series(double alpha, std::int64_t cutoff) {
  if (!(alpha > 1.0)) throw std::invalid_argument("zeta_series: alpha must exceed 1");
  if (cutoff < 1) throw std::invalid_argument("zeta_series: cutoff must be positive");
  // Smallest terms first, Neumaier-compensated.
  double sum = 0.0;
  double comp = 0.0;
  for (std::int64_t k = cutoff; k >= 1; --k) {
    const double term = std::pow(static_cast<double>(k), -alpha);
    const double t = sum + term;
    comp += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  const double K = static_cast<double>(cutoff);
  const double tail = std::pow(K, 1.0 - alpha) / (alpha - 1.0) - 0.5 * std::pow(K, -alpha) +
                      alpha * std::pow(K, -alpha - 1.0) / 12.0;
  return sum + comp + tail;
}

ImmigrationLaw::ImmigrationLaw(double alpha, double c) : alpha_(alpha), c_(c) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::invalid_argument("immigration: alpha must lie in (1, 2)");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("immigration: c must lie in (0, 1)");
  mu_b_ = c_ * zeta_series(alpha_, kMeanSeriesCutoff);
}

double ImmigrationLaw::survival_at_least(std::int64_t k) const {
  if (k <= 0) return 1.0;
  return c_ * std::pow(static_cast<double>(k), -alpha_);
}

std::int64_t sample_immigration(const ImmigrationLaw& law, double u) {
  const double v = 1.0 - u;
  const double c = law.c();
  if (!at_least(c, v)) return 0;
  const double a = law.alpha();
  auto k = static_cast<std::int64_t>(std::floor(std::pow(c / v, 1.0 / a)));
  if (k < 1) k = 1;
  while (k > 1 && !at_least(c * std::pow(static_cast<double>(k), -a), v)) --k;
  while (at_least(c * std::pow(static_cast<double>(k + 1), -a), v)) ++k;
  return k;
}

std::string_view to_string(OffspringFamily f) {
  switch (f) {
    case OffspringFamily::bernoulli: return "bernoulli";
    case OffspringFamily::poisson: return "poisson";
    case OffspringFamily::geometric: return "geometric";
  }
  return "unknown";
}

OffspringFamily parse_offspring_family(std::string_view name) {
  if (name == "bernoulli") return OffspringFamily::bernoulli;
  if (name == "poisson") return OffspringFamily::poisson;
  if (name == "geometric") return OffspringFamily::geometric;
  throw std::invalid_argument("unknown offspring family '" + std::string(name) + "'");
}

OffspringLaw::OffspringLaw(OffspringFamily family, double mu_a) : family_(family), mu_a_(mu_a) {
  if (!(mu_a > 0.0 && mu_a < 1.0))
    throw std::invalid_argument("offspring: mu_A must lie in (0, 1)");
  switch (family) {
    case OffspringFamily::bernoulli: sigma2_ = mu_a * (1.0 - mu_a); break;
    case OffspringFamily::poisson: sigma2_ = mu_a; break;
    case OffspringFamily::geometric: sigma2_ = mu_a * (1.0 + mu_a); break;
  }
}

AggregateDraw sample_aggregate_offspring(const OffspringLaw& law, std::int64_t parents, Rng& rng) {
  if (parents < 0) throw std::invalid_argument("aggregate offspring: negative parent count");
  AggregateDraw draw;
  draw.parent_count = parents;
  if (parents == 0) return draw;
  switch (law.family()) {
    case OffspringFamily::bernoulli:
      draw.total_offspring = std::binomial_distribution<std::int64_t>(parents, law.mean())(rng);
      break;
    case OffspringFamily::poisson:
      draw.total_offspring =
          std::poisson_distribution<std::int64_t>(law.mean() * static_cast<double>(parents))(rng);
      break;
    case OffspringFamily::geometric:
      // Failures before the parents-th success, success probability 1/(1+mu).
      draw.total_offspring =
          std::negative_binomial_distribution<std::int64_t>(parents, 1.0 / (1.0 + law.mean()))(rng);
      break;
  }
  return draw;
}

std::int64_t sample_offspring(const OffspringLaw& law, Rng& rng) {
  switch (law.family()) {
    case OffspringFamily::bernoulli: return uniform_open(rng) < law.mean() ? 1 : 0;
    case OffspringFamily::poisson: return std::poisson_distribution<std::int64_t>(law.mean())(rng);
    case OffspringFamily::geometric:
      return std::geometric_distribution<std::int64_t>(1.0 / (1.0 + law.mean()))(rng);
  }
  return 0;
}

double karamata_limit(double beta, double alpha, KaramataForm form) {
  return form == KaramataForm::lower ? (beta - alpha) / alpha : (alpha - beta) / alpha;
}

double karamata_ratio(double beta, double alpha, double x,
                      const std::function<double(double)>& survival,
                      const std::function<double(double)>& truncated_moment) {
  return karamata_ratio(beta, alpha, x, survival, truncated_moment,
                        beta >= alpha ? KaramataForm::lower : KaramataForm::upper);
}

double karamata_ratio(double beta, double alpha, double x,
                      const std::function<double(double)>& survival,
                      const std::function<double(double)>& truncated_moment, KaramataForm form) {
  if (!(x > 0.0)) throw std::invalid_argument("karamata: x must be positive");
  if (form == KaramataForm::lower && beta < alpha)
    throw std::invalid_argument("karamata: lower form needs beta >= alpha");
  if (form == KaramataForm::upper && beta >= alpha)
    throw std::invalid_argument("karamata: upper form needs beta < alpha");
  const double denom = truncated_moment(x);
  if (!(denom > 0.0)) throw std::domain_error("karamata: truncated moment must be positive");
  return std::pow(x, beta) * survival(x) / denom;
}

}  // namespace gwi::dist
