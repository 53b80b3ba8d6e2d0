#include "gwi/limitlaw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "gwi/quadrature.hpp"

namespace gwi::limit {

using cplx = std::complex<double>;
using std::numbers::pi;

LimitParams::LimitParams(double alpha, double mu_a, double sigma_a2)
    : alpha_(alpha), mu_a_(mu_a), sigma_a2_(sigma_a2) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("limit law: alpha must lie in (1, 2)");
  if (!(mu_a > 0.0 && mu_a < 1.0)) throw std::invalid_argument("limit law: mu_A must lie in (0, 1)");
  if (!(sigma_a2 > 0.0 && std::isfinite(sigma_a2)))
    throw std::invalid_argument("limit law: sigma_A^2 must be positive and finite");
  theta_ = 1.0 - std::pow(mu_a, alpha);
  c1_ = theta_ * std::tgamma(1.0 - alpha / 2.0) * std::cos(pi * alpha / 4.0) /
        std::pow(1.0 - mu_a * mu_a, alpha / 2.0);
  c2_ = theta_ * std::tgamma(1.0 - alpha / 3.0) *
        std::pow(sigma_a2 / (2.0 * (1.0 - mu_a * mu_a * mu_a)), alpha / 3.0);
}

std::string_view to_string(Remainder mode) {
  return mode == Remainder::truncate ? "truncate" : "compensate";
}

Remainder parse_remainder(std::string_view name) {
  if (name == "truncate") return Remainder::truncate;
  if (name == "compensate") return Remainder::compensate;
  throw std::invalid_argument("unknown remainder mode '" + std::string(name) + "'");
}

namespace {

double one_minus_mu2(const LimitParams& p) { return 1.0 - p.mu_a() * p.mu_a(); }
double one_minus_mu3(const LimitParams& p) { return 1.0 - p.mu_a() * p.mu_a() * p.mu_a(); }

/// int_0^eps y^k theta alpha y^{-alpha-1} dy for k > alpha.
double small_point_moment(const LimitParams& p, double k, double eps) {
  return p.theta() * p.alpha() * std::pow(eps, k - p.alpha()) / (k - p.alpha());
}

void check_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("limit sampler: eps must be positive");
}

}  // namespace

double trunc_v1_mean_bound(const LimitParams& p, double eps) {
  return small_point_moment(p, 2.0, eps) / one_minus_mu2(p);
}

double trunc_v2_sd_bound(const LimitParams& p, double eps) {
  return std::sqrt(p.sigma_a2() * small_point_moment(p, 3.0, eps) / one_minus_mu3(p));
}

double residual_v1_sd(const LimitParams& p, double eps) {
  return std::sqrt(small_point_moment(p, 4.0, eps)) / one_minus_mu2(p);
}

double residual_v2_scale(const LimitParams& p, double eps) {
  return p.sigma_a2() * std::sqrt(small_point_moment(p, 6.0, eps)) / (2.0 * one_minus_mu3(p));
}

double cf_truncation_slack(const LimitParams& p, double eps, double s, double t, Remainder mode) {
  if (mode == Remainder::truncate)
    return std::abs(s) * trunc_v1_mean_bound(p, eps) + std::abs(t) * trunc_v2_sd_bound(p, eps);
  const double r1 = residual_v1_sd(p, eps);
  const double r2 = residual_v2_scale(p, eps);
  return s * s * r1 * r1 + t * t * t * t * r2 * r2;
}

double eps_for_bound(const LimitParams& p, double target, Remainder mode) {
  if (!(target > 0.0)) throw std::invalid_argument("eps_for_bound: target must be positive");
  // Every bound is K eps^e; invert each with K taken at eps = 1.
  auto invert = [&](double (*bound)(const LimitParams&, double), double exponent) {
    return std::pow(target / bound(p, 1.0), 1.0 / exponent);
  };
  const double a = p.alpha();
  double eps;
  if (mode == Remainder::truncate)
    eps = std::min(invert(trunc_v1_mean_bound, 2.0 - a), invert(trunc_v2_sd_bound, (3.0 - a) / 2.0));
  else
    eps = std::min(invert(residual_v1_sd, (4.0 - a) / 2.0), invert(residual_v2_scale, (6.0 - a) / 2.0));
  return eps * (1.0 - 1e-9);
}

LimitPair sample_limit_pair(const LimitParams& p, double eps, Rng& rng, Remainder mode) {
  check_eps(eps);
  std::normal_distribution<double> normal(0.0, std::sqrt(p.sigma_a2()));
  const double log_theta = std::log(p.theta());
  const double log_eps = std::log(eps);
  const double inv_alpha = 1.0 / p.alpha();
  LimitPair out;
  double gamma = 0.0;
  double s32z = 0.0;
  for (;;) {
    gamma += exponential(rng);
    const double log_point = (log_theta - std::log(gamma)) * inv_alpha;
    if (log_point <= log_eps) break;
    const double point = std::exp(log_point);
    const double p2 = point * point;
    s32z += point * std::sqrt(point) * normal(rng);
    out.sum_p2 += p2;
    out.sum_p3 += p2 * point;
    ++out.terms_used;
  }
  double s2 = out.sum_p2;
  if (mode == Remainder::compensate) {
    s2 += small_point_moment(p, 2.0, eps);
    s32z += std::sqrt(small_point_moment(p, 3.0, eps)) * normal(rng);
    out.compensated = true;
  }
  out.v1 = s2 / one_minus_mu2(p);
  out.v2 = s32z / std::sqrt(one_minus_mu3(p));
  out.trunc_v1_mean_bound = trunc_v1_mean_bound(p, eps);
  out.trunc_v2_sd_bound = trunc_v2_sd_bound(p, eps);
  return out;
}

std::vector<double> sample_limit_points(const LimitParams& p, double eps, Rng& rng) {
  check_eps(eps);
  const double scale = std::pow(p.theta(), 1.0 / p.alpha());
  std::vector<double> points;
  double gamma = 0.0;
  for (;;) {
    gamma += exponential(rng);
    const double point = scale * std::pow(gamma, -1.0 / p.alpha());
    if (point <= eps) break;
    points.push_back(point);
  }
  return points;
}

namespace {

/// e^z - 1 without cancellation for small |z|.
cplx expm1(cplx z) {
  const double x = z.real(), y = z.imag();
  const double half = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half * half, std::exp(x) * std::sin(y)};
}

constexpr double kCfTol = 1e-11;
constexpr double kDampingCutoff = 45.0;

}  // namespace

std::complex<double> cf_log_joint(const LimitParams& p, double s, double t) {
  const double alpha = p.alpha();
  const double a = s / one_minus_mu2(p);
  const double b = p.sigma_a2() * t * t / (2.0 * one_minus_mu3(p));
  if (a == 0.0 && b == 0.0) return {0.0, 0.0};

  // The integrand y -> (exp{i a y^2 - b y^3} - 1) y^{-alpha-1} is analytic in
  // the right half plane and decays on arcs of the sector between the real
  // axis and angle phi, so the ray y = r e^{i phi} gives the same integral.
  // On that ray both terms of the exponent are damped and the oscillation of
  // exp{i a y^2} disappears (completely when b = 0, phi = pi/4).
  const double sgn = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  const double phi = b == 0.0 ? sgn * pi / 4.0 : sgn * pi / 8.0;
  const cplx w = std::polar(1.0, phi);
  const cplx c2 = cplx(0.0, a) * w * w;
  const cplx c3 = -b * w * w * w;
  auto g = [&](double r) { return (c2 + c3 * r) * (r * r); };

  // Re g(r) = -(A r^2 + B r^3); find where the damping passes the cutoff.
  const double A = std::abs(a) * std::sin(2.0 * std::abs(phi));
  const double B = b * std::cos(3.0 * phi);
  auto damping = [&](double r) { return (A + B * r) * r * r; };
  const double r_power = std::pow(1e15 / alpha, 1.0 / alpha);
  double r_hi = 1.0;
  while (damping(r_hi) < kDampingCutoff && r_hi < r_power) r_hi *= 2.0;
  r_hi = std::min(r_hi, r_power);

  // (0, 1]: r = v^q with q = 1/(2 - alpha) turns r^{1-alpha} into a constant.
  const double q = 1.0 / (2.0 - alpha);
  auto inner = [&](double v) -> cplx {
    const double r = std::pow(v, q);
    return q * std::pow(v, -2.0 * q) * expm1(g(r));
  };
  // [1, inf): r = e^v; the "-1" part integrates to 1/alpha in closed form.
  auto outer = [&](double v) -> cplx {
    const double r = std::exp(v);
    return std::exp(g(r) - alpha * v);
  };
  const auto head = quad::integrate<cplx>(inner, 0.0, 1.0, kCfTol);
  const auto tail = quad::integrate<cplx>(outer, 0.0, std::log(r_hi), kCfTol);
  const cplx rot = std::polar(1.0, -alpha * phi);
  return p.theta() * alpha * rot * (head.value + tail.value - 1.0 / alpha);
}

std::complex<double> cf_joint(const LimitParams& p, double s, double t) {
  return std::exp(cf_log_joint(p, s, t));
}

MarginalCf cf_marginals(const LimitParams& p, double s, double t) {
  const double alpha = p.alpha();
  const double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  const double mag = p.c1() * std::pow(std::abs(s), alpha / 2.0);
  MarginalCf out;
  out.v1 = std::exp(cplx(-mag, mag * std::tan(pi * alpha / 4.0) * sgn));
  out.v2 = std::exp(-p.c2() * std::pow(std::abs(t), 2.0 * alpha / 3.0));
  return out;
}

double cdf_ratio(const LimitParams& p, double x) {
  if (x == 0.0) return 0.5;
  const double alpha = p.alpha();
  auto integrand = [&](double u) { return std::imag(cf_joint(p, -u * x, u)) / u; };
  // (0, 1] with u = w^{2/alpha}: du / u = (2/alpha) dw / w.
  const double k = 2.0 / alpha;
  auto head_fn = [&](double w) {
    const double u = std::pow(w, k);
    return k * std::imag(cf_joint(p, -u * x, u)) / w;
  };
  const double u_max =
      std::max(1.0, std::pow(std::log(1e12) / p.c2(), 3.0 / (2.0 * alpha)));
  constexpr double tol = 1e-8;
  const auto head = quad::integrate<double>(head_fn, 0.0, 1.0, tol);
  const auto tail = quad::integrate<double>(integrand, 1.0, u_max, tol);
  return std::clamp(0.5 - (head.value + tail.value) / pi, 0.0, 1.0);
}

double u_statistic(const LimitParams& p, double sum_p2, double sum_p3) {
  if (!(sum_p2 > 0.0)) throw std::invalid_argument("u_statistic: needs at least one point");
  return std::pow(p.theta(), 1.0 / p.alpha()) * sum_p3 / (sum_p2 * sum_p2);
}

double u_statistic(const LimitParams& p, std::span<const double> points) {
  double s2 = 0.0, s3 = 0.0;
  for (double v : points) {
    s2 += v * v;
    s3 += v * v * v;
  }
  return u_statistic(p, s2, s3);
}

}  // namespace gwi::limit
