#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gwi/estimator.hpp"
#include "gwi/stats.hpp"

using namespace gwi;
using namespace gwi::est;

namespace {

ModelParams reference() {
  return ModelParams(dist::OffspringLaw(dist::OffspringFamily::poisson, 0.5), dist::ImmigrationLaw(1.5, 0.3));
}

Trajectory hand_path(std::vector<std::int64_t> x, std::vector<double> m) {
  Trajectory t;
  t.x = std::move(x);
  t.m = std::move(m);
  t.offspring.assign(t.m.size(), 0);
  return t;
}

}  // namespace

TEST_CASE("cls: worked values") {
  const std::vector<std::int64_t> x{1, 2, 1};
  const auto r = cls_estimate(x, 1.0);
  CHECK(r.defined);
  CHECK(r.mu_hat == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.cross == 1.0);
  CHECK(r.denominator == 5.0);

  const std::vector<std::int64_t> zeros{0, 0, 0};
  CHECK_FALSE(cls_estimate(zeros, 0.4).defined);

  for (std::int64_t k : {1, 7, 1000}) {
    const std::vector<std::int64_t> flat(50, k);
    CHECK(cls_estimate(flat, 0.39).mu_hat == doctest::Approx((static_cast<double>(k) - 0.39) / static_cast<double>(k)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(cls_estimate(std::vector<std::int64_t>{3}, 0.4), std::invalid_argument);
}

TEST_CASE("cls error matches mu_hat - mu_A computed from the data") {
  const auto p = reference();
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto t = simulate_stationary(p, 5000, 3, rep);
    const auto r = cls_estimate(t.x, p.mu_b());
    const auto e = cls_error(t);
    REQUIRE(r.defined);
    REQUIRE(e.has_value());
    CHECK(*e == doctest::Approx(r.mu_hat - p.mu_a()).epsilon(1e-9));
  }
}

TEST_CASE("partial sums: hand trajectories") {
  const double a_n = 37.0;
  // X_2 = a_n, all else zero, M_3 = 0.
  auto spike = hand_path({0, 0, 37, 0, 0}, {0.5, -1.0, 0.0, 0.25});
  const auto s = partial_sums(spike, a_n);
  CHECK(s.v1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.v2 == 0.0);

  auto zero = hand_path({0, 0, 0, 0}, {-0.4, -0.4, -0.4});
  const auto z = partial_sums(zero, a_n);
  CHECK(z.v1 == 0.0);
  CHECK(z.v2 == 0.0);

  CHECK_THROWS_AS(partial_sums(zero, 0.0), std::invalid_argument);
}

TEST_CASE("partial sums: sum of squares equals the integer accumulation") {
  const auto p = reference();
  int checked = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto t = simulate_stationary(p, 20'000, 17, rep);
    const std::size_t n = t.horizon() - 1;
    if (*std::max_element(t.x.begin(), t.x.end()) > 1'000'000) continue;
    unsigned __int128 exact = 0;
    for (std::size_t j = 1; j <= n; ++j) exact += static_cast<unsigned __int128>(t.x[j] * t.x[j]);
    // a_n = 1 keeps the division exact.
    CHECK(partial_sums(t, 1.0).v1 == static_cast<double>(exact));
    const double a_n = 123.456;
    CHECK(partial_sums(t, a_n).v1 * a_n * a_n == doctest::Approx(static_cast<double>(exact)).epsilon(4e-16));
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("scaled error") {
  ClsResult at_truth{0.5, 0.0, 1.0, true};
  CHECK(scaled_error(at_truth, 0.5, 278.2) == 0.0);
  CHECK(scaled_error({0.6, 0.0, 1.0, true}, 0.5, 4.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(scaled_error({}, 0.5, 10.0), std::domain_error);
}

TEST_CASE("shifted window: scaled error equals v2 / v1") {
  const auto p = reference();
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto t = simulate_stationary(p, 10'001, 5, rep);
    const double a_n = scaling(p, 10'000, ScalingMode::analytic).a_n;
    // cls over X_1..X_{n+1} uses the pairs (X_j, X_{j+1}), j = 1..n.
    const auto cls = cls_estimate(std::span(t.x).subspan(1), p.mu_b());
    const auto v = partial_sums(t, a_n);
    CHECK(scaled_error(cls, p.mu_a(), a_n) == doctest::Approx(v.v2 / v.v1).epsilon(1e-9));
  }
}

TEST_CASE("compensated sums are insensitive to summation order") {
  Rng rng = make_stream(9, 0);
  std::vector<double> terms(100'000);
  for (auto& v : terms) {
    // Heavy-tailed, mixed-sign magnitudes over many decades.
    const double mag = std::pow(uniform_open(rng), -1.0 / 0.75);
    v = (uniform_open(rng) < 0.5 ? -1.0 : 1.0) * mag;
  }
  CompensatedSum a;
  for (double v : terms) a.add(v);
  std::shuffle(terms.begin(), terms.end(), rng);
  CompensatedSum b;
  for (double v : terms) b.add(v);
  double abs_total = 0.0;
  for (double v : terms) abs_total += std::abs(v);
  CHECK(std::abs(a.value() - b.value()) <= 1e-12 * abs_total);
}

TEST_CASE("undefined estimates are as rare as an all-zero path") {
  const auto p = reference();
  constexpr int kReps = 10'000;
  int undefined = 0;
  for (int r = 0; r < kReps; ++r) {
    const auto t = simulate_stationary(p, 50, 21, static_cast<std::uint64_t>(r));
    undefined += !cls_estimate(std::span(t.x.data(), 51), p.mu_b()).defined;
  }
  const double bound = std::pow(0.7, 49);
  CHECK(static_cast<double>(undefined) / kReps <= bound + 3.0 * std::sqrt(bound * (1 - bound) / kReps) + 1e-12);
}

TEST_CASE("median absolute scaled error is stable across seeds and n") {
  const auto p = reference();
  auto median_abs = [&](std::size_t n, std::uint64_t seed) {
    const double a_n = scaling(p, n, ScalingMode::analytic).a_n;
    std::vector<double> e;
    for (std::uint64_t r = 0; r < 400; ++r) {
      const auto t = simulate_stationary(p, n, seed, r);
      const auto c = cls_estimate(t.x, p.mu_b());
      if (c.defined) e.push_back(std::abs(scaled_error(c, p.mu_a(), a_n)));
    }
    return stats::median(e);
  };
  const double m1 = median_abs(10'000, 1), m2 = median_abs(10'000, 2), m3 = median_abs(30'000, 3);
  CHECK(std::isfinite(m1));
  CHECK(std::abs(m1 - m2) <= 0.25 * m1);
  CHECK(std::abs(m1 - m3) <= 0.25 * m1);
}
