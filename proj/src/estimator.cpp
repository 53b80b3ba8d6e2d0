#include "gwi/estimator.hpp"

#include <limits>
#include <stdexcept>

namespace gwi::est {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

}  // namespace

std::optional<u128> sum_squares_exact(std::span<const std::int64_t> x) {
  u128 total = 0;
  for (std::int64_t v : x) {
    const u128 a = static_cast<u128>(v < 0 ? -static_cast<i128>(v) : static_cast<i128>(v));
    u128 sq = 0;
    if (__builtin_mul_overflow(a, a, &sq)) return std::nullopt;
    if (__builtin_add_overflow(total, sq, &total)) return std::nullopt;
  }
  return total;
}

ClsResult cls_estimate(std::span<const std::int64_t> x, double mu_b) {
  if (x.size() < 2) throw std::invalid_argument("cls_estimate: need at least two observations");
  // Integer side channel: sum X_{i-1}^2, sum X_{i-1} X_i and sum X_{i-1} are
  // exact as long as they fit; the floating path is the fallback.
  u128 sq = 0, prod = 0, lin = 0;
  bool exact = true;
  CompensatedSum sq_f, cross_f;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const auto prev = x[i - 1];
    const auto cur = x[i];
    if (exact) {
      u128 p2 = 0, pc = 0;
      exact = !__builtin_mul_overflow(static_cast<u128>(prev), static_cast<u128>(prev), &p2) &&
              !__builtin_mul_overflow(static_cast<u128>(prev), static_cast<u128>(cur), &pc) &&
              !__builtin_add_overflow(sq, p2, &sq) && !__builtin_add_overflow(prod, pc, &prod) &&
              !__builtin_add_overflow(lin, static_cast<u128>(prev), &lin);
    }
    const double pf = static_cast<double>(prev);
    sq_f.add(pf * pf);
    cross_f.add(pf * (static_cast<double>(cur) - mu_b));
  }
  ClsResult r;
  if (exact) {
    r.denominator = static_cast<double>(sq);
    r.cross = static_cast<double>(prod) - mu_b * static_cast<double>(lin);
  } else {
    r.denominator = sq_f.value();
    r.cross = cross_f.value();
  }
  r.defined = r.denominator > 0.0;
  if (r.defined) r.mu_hat = r.cross / r.denominator;
  return r;
}

std::optional<double> cls_error(const Trajectory& traj) {
  CompensatedSum num, den;
  for (std::size_t i = 1; i <= traj.horizon(); ++i) {
    const double prev = static_cast<double>(traj.x[i - 1]);
    num.add(prev * traj.residual(i));
    den.add(prev * prev);
  }
  if (!(den.value() > 0.0)) return std::nullopt;
  return num.value() / den.value();
}

PartialSumPair partial_sums(const Trajectory& traj, double a_n) {
  if (!(a_n > 0.0)) throw std::invalid_argument("partial_sums: a_n must be positive");
  if (traj.horizon() < 2) throw std::invalid_argument("partial_sums: horizon must be at least 2");
  const std::size_t n = traj.horizon() - 1;
  CompensatedSum sq_f, xm;
  for (std::size_t j = 1; j <= n; ++j) {
    const double xj = static_cast<double>(traj.x[j]);
    sq_f.add(xj * xj);
    xm.add(xj * traj.residual(j + 1));
  }
  double sq = sq_f.value();
  if (auto exact = sum_squares_exact(std::span(traj.x).subspan(1, n))) sq = static_cast<double>(*exact);
  return {sq / (a_n * a_n), xm.value() / (a_n * std::sqrt(a_n))};
}

double scaled_error(const ClsResult& cls, double mu_a, double a_n) {
  if (!cls.defined) throw std::domain_error("scaled_error: CLS estimate is undefined");
  return std::sqrt(a_n) * (cls.mu_hat - mu_a);
}

}  // namespace gwi::est
