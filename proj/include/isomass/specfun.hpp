#pragma once

// Gauss hypergeometric function on the parameter line
//   2F1(1/2, (3-p)/(p-1); 2/(p-1); x),  1 < p < 3,  x <= 1,
// which appears in the capacity bound for coexterior domains. Along this
// line c - b = 1 and c - a - b = 1/2.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "isomass/capacity.hpp"
#include "isomass/errors.hpp"
#include "isomass/numerics.hpp"

namespace isomass {

struct F21Params {
  double a = 0.5;
  double b = 0;
  double c = 0;

  static F21Params from_exponent(double p) {
    check_exponent(p);
    return {0.5, (3 - p) / (p - 1), 2 / (p - 1)};
  }
};

namespace detail {

constexpr long kF21TermBudget = 100000;

// sum_n (a)_n (b)_n / ((c)_n n!) z^n for 0 <= z < 1. The term ratio tends to
// z; once it stops growing, the remaining tail is bounded by
// term * r / (1 - r) with r = max(ratio, z).
inline double f21_series(double a, double b, double c, double z) {
  if (z == 0) return 1;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const auto ratio = [&](long n) { return (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z; };
  double term = 1, sum = 1;
  for (long n = 0; n < kF21TermBudget; ++n) {
    const double r = ratio(n);
    term *= r;
    sum += term;
    const double bound = std::max(ratio(n + 1), z);
    if (bound < 1 && ratio(n + 1) <= std::max(r, z) && std::abs(term) * bound / (1 - bound) <= 0.5 * eps * std::abs(sum))
      return sum;
  }
  throw NonConvergence("2F1 series did not converge within " + std::to_string(kF21TermBudget) + " terms");
}

}  // namespace detail

/// 2F1(1/2, (3-p)/(p-1); 2/(p-1); x) for x <= 1.
///
/// x in [0, 1]: direct series, or the 1 - x connection formula where the
///   direct series would converge slowly. The connection formula subtracts
///   two terms of size x^(-b), so it is used only where x^(-b) <= e^5.
/// x < 0: Pfaff transformation (1 - x)^(-1/2) 2F1(1/2, 1; c; x/(x-1)).
inline double gauss_2f1(double p, double x, const ToleranceConfig& cfg = {}) {
  (void)cfg;
  const F21Params f = F21Params::from_exponent(p);
  if (!(x <= 1)) throw DomainError("2F1 is evaluated only for x <= 1");
  if (x < 0) {
    const double z = x / (x - 1);
    return detail::f21_series(f.a, f.c - f.b, f.c, z) / std::sqrt(1 - x);
  }
  const bool connect = x > 0.5 && -f.b * std::log(x) <= 5;
  if (!connect) return detail::f21_series(f.a, f.b, f.c, x);
  // F = A1 x^(-b) + A2 (1-x)^(1/2) 2F1(c-a, 1; 3/2; 1-x), using c-b = 1, with
  // A1 = G(c) G(1/2) / G(c-1/2) and A2 = G(c) G(-1/2) / (G(1/2) G(b)) = -2b.
  const double a1 = std::exp(std::lgamma(f.c) + 0.5 * std::log(kPi) - std::lgamma(f.c - 0.5));
  const double a2 = -2 * f.b;
  const double y = 1 - x;
  const double first = a1 * std::pow(x, -f.b);
  if (y == 0) return first;
  return first + a2 * std::sqrt(y) * detail::f21_series(f.c - f.a, 1, 1.5, y);
}

/// First n Taylor coefficients of the series in x.
inline std::vector<double> f21_coefficients(double p, int n) {
  const F21Params f = F21Params::from_exponent(p);
  std::vector<double> out;
  double coef = 1;
  for (int k = 0; k < n; ++k) {
    out.push_back(coef);
    coef *= (f.a + k) * (f.b + k) / ((f.c + k) * (k + 1));
  }
  return out;
}

/// The first order coefficient a b / c, which equals (3 - p)/4.
inline double series_coefficient(double p) { return f21_coefficients(p, 2)[1]; }

struct ExpansionRow {
  double x = 0;
  double value = 0;
  double ratio = 0;  // |2F1 - (1 + (3-p)/4 x)| / x^2
};

struct ExpansionReport {
  double p = 0;
  double bound = 0;  // largest ratio over the grid
  std::vector<ExpansionRow> rows;
};

/// Remainder of the first order expansion divided by x^2 on a grid in [-0.1, 0.1] \ {0}.
inline ExpansionReport expansion_check(double p, const std::vector<double>& x_grid, const ToleranceConfig& cfg = {}) {
  ExpansionReport rep{p, 0, {}};
  const double slope = (3 - p) / 4;
  for (double x : x_grid) {
    if (x == 0 || std::abs(x) > 0.1) throw DomainError("expansion grid must lie in [-0.1, 0.1] without 0");
    const double v = gauss_2f1(p, x, cfg);
    const double ratio = std::abs(v - (1 + slope * x)) / (x * x);
    rep.rows.push_back({x, v, ratio});
    rep.bound = std::max(rep.bound, ratio);
  }
  return rep;
}

}  // namespace isomass
