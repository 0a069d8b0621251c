#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace truncmean {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980167925, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights attached to the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace detail

/// One application of the 21-point Gauss-Kronrod rule on [a, b].
template <class F>
QuadResult gauss_kronrod21(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * detail::kKronrodWeights[10];
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * detail::kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += detail::kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += detail::kGaussWeights[j / 2] * sum;
  }
  QuadResult r;
  r.value = kronrod * half;
  r.abs_error = std::abs((kronrod - gauss) * half);
  r.evaluations = 21;
  return r;
}

/// Globally adaptive Gauss-Kronrod quadrature: the panel with the largest error
/// estimate is bisected until the total error meets max(abs_tol, rel_tol*|I|).
template <class F>
QuadResult integrate(F&& f, double a, double b, QuadOptions opts = {}) {
  if (a == b) return {};
  std::priority_queue<detail::Panel> heap;
  QuadResult first = gauss_kronrod21(f, a, b);
  heap.push({a, b, first.value, first.abs_error});
  double total = first.value;
  double error = first.abs_error;
  int evaluations = first.evaluations;
  int intervals = 1;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (intervals >= opts.max_intervals) {
      return {total, error, evaluations, false};
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Panel cannot be split further in double precision.
      return {total, error, evaluations, false};
    }
    const QuadResult left = gauss_kronrod21(f, worst.a, mid);
    const QuadResult right = gauss_kronrod21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.abs_error + right.abs_error - worst.error;
    evaluations += 42;
    ++intervals;
    heap.push({worst.a, mid, left.value, left.abs_error});
    heap.push({mid, worst.b, right.value, right.abs_error});
  }
  // Re-sum to shed the drift from incremental updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {total, error, evaluations, true};
}

/// Integrates over [a, b] split at the given interior breakpoints.
template <class F>
QuadResult integrate_piecewise(F&& f, std::vector<double> breaks, QuadOptions opts = {}) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadResult out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const QuadResult piece = integrate(f, breaks[i], breaks[i + 1], opts);
    out.value += piece.value;
    out.abs_error += piece.abs_error;
    out.evaluations += piece.evaluations;
    out.converged = out.converged && piece.converged;
  }
  return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int points);

}  // namespace truncmean
