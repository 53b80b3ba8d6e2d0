#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

namespace gwi::quad {

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  int panels = 0;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> kronrod15(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(mid);
  T kron = fc * kKronrod[7];
  T gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const T sum = f(mid - dx) + f(mid + dx);
    kron += sum * kKronrod[j];
    if (j % 2 == 1) gauss += sum * kGauss[j / 2];
  }
  kron *= half;
  gauss *= half;
  return {a, b, kron, magnitude(kron - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration on [a, b].
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate falls below `abs_tol` or `max_panels` is reached. Works for real
/// and complex integrands.
template <class T, class F>
Estimate<T> integrate(F&& f, double a, double b, double abs_tol, int max_panels = 2000) {
  using Panel = detail::Panel<T>;
  std::priority_queue<Panel> heap;
  Panel first = detail::kronrod15<T>(f, a, b);
  T total = first.value;
  double err = first.error;
  heap.push(first);
  int panels = 1;
  while (err > abs_tol && panels < max_panels) {
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = detail::kronrod15<T>(f, worst.a, mid);
    const Panel right = detail::kronrod15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the drift of the running updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, panels};
}

}  // namespace gwi::quad
