#pragma once

// Scalar numerics shared by every module: adaptive Gauss-Kronrod quadrature on
// finite and semi-infinite ranges, bracketed root finding, and acceleration of
// slowly converging sequences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isomass/errors.hpp"

namespace isomass {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ToleranceConfig {
  double quad_rel_tol = 1e-10;
  double quad_abs_tol = 1e-12;
  double root_tol = 1e-12;
  int max_subdivisions = 60;  // maximal bisection depth of a quadrature interval
  int extrap_terms = 6;
  double cutoff_radius = 1e8;
  int probe_per_decade = 200;  // density of the geometric probe grid

  void validate() const {
    if (!(quad_rel_tol > 0) || !(quad_abs_tol > 0) || !(root_tol > 0))
      throw ConfigError("tolerances must be strictly positive");
    if (max_subdivisions < 1) throw ConfigError("max_subdivisions must be positive");
    if (extrap_terms < 3) throw ConfigError("extrap_terms must be at least 3");
    if (!(cutoff_radius > 1)) throw ConfigError("cutoff_radius must exceed 1");
    if (probe_per_decade < 4) throw ConfigError("probe_per_decade must be at least 4");
  }
};

struct QuadResult {
  double value = 0;
  double err_estimate = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, err;
  int depth;
  int stalls = 0;  // consecutive splits that failed to reduce the error
  bool operator<(const Panel& o) const { return err < o.err; }
};

inline std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

template <class F>
Panel gauss_kronrod15(F& f, double lo, double hi, int depth) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0 && err != 0) err = resasc * std::min(1.0, std::pow(200 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * resabs, err);
  if (!std::isfinite(value) || !std::isfinite(err))
    throw DomainError("integrand is not finite on [" + fmt_g(lo) + ", " + fmt_g(hi) + "]");
  return {lo, hi, value, err, depth};
}

// Global adaptive bisection. Panels that hit the depth limit are frozen and
// make the call fail if their error still matters. Panels whose splits keep
// reproducing the same value without shrinking the error are limited by
// roundoff in the integrand; they are frozen too, and their error is simply
// reported.
template <class F>
QuadResult adaptive_finite(F& f, double lo, double hi, const ToleranceConfig& cfg) {
  constexpr int kMaxPanels = 20000;
  constexpr int kMaxStalls = 4;
  std::priority_queue<Panel> open;
  std::vector<Panel> frozen;
  double depth_limited_err = 0;
  open.push(gauss_kronrod15(f, lo, hi, 0));
  double total = open.top().value;
  double total_err = open.top().err;
  int panels = 1;

  const auto tolerance = [&] { return std::max(cfg.quad_abs_tol, cfg.quad_rel_tol * std::abs(total)); };
  while (total_err > tolerance()) {
    if (open.empty()) {
      if (depth_limited_err > tolerance())
        throw NonConvergence("quadrature hit the subdivision depth limit on [" + fmt_g(lo) + ", " + fmt_g(hi) +
                             "], error estimate " + fmt_g(total_err));
      break;
    }
    if (panels >= kMaxPanels)
      throw NonConvergence("quadrature did not reach tolerance on [" + fmt_g(lo) + ", " + fmt_g(hi) +
                           "], error estimate " + fmt_g(total_err));
    Panel worst = open.top();
    open.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (worst.depth >= cfg.max_subdivisions || mid <= worst.lo || mid >= worst.hi) {
      depth_limited_err += worst.err;
      frozen.push_back(worst);
      continue;
    }
    Panel left = gauss_kronrod15(f, worst.lo, mid, worst.depth + 1);
    Panel right = gauss_kronrod15(f, mid, worst.hi, worst.depth + 1);
    const double children = left.value + right.value;
    const double children_err = left.err + right.err;
    total += children - worst.value;
    total_err += children_err - worst.err;
    ++panels;
    const bool stalled =
        children_err >= 0.99 * worst.err && std::abs(children - worst.value) <= 1e-5 * std::abs(children);
    left.stalls = right.stalls = stalled ? worst.stalls + 1 : 0;
    for (const Panel& c : {left, right}) {
      if (c.stalls >= kMaxStalls)
        frozen.push_back(c);
      else
        open.push(c);
    }
  }

  // Re-sum to shed the drift of the incremental updates.
  double value = 0, err = 0;
  for (const auto& p : frozen) value += p.value, err += p.err;
  while (!open.empty()) {
    value += open.top().value;
    err += open.top().err;
    open.pop();
  }
  return {value, err};
}

}  // namespace detail

/// Adaptive 15-point Gauss-Kronrod quadrature of f over [lo, hi].
///
/// hi may be +infinity; the range is then mapped onto [0, 1) by
/// s = lo + u/(1-u). Throws DomainError when lo >= hi and NonConvergence
/// when the subdivision budget is exhausted.
template <class F>
QuadResult integrate(F&& f, double lo, double hi, const ToleranceConfig& cfg = {}) {
  if (!(lo < hi) || std::isnan(lo) || std::isinf(lo))
    throw DomainError("integration range requires lo < hi, got [" + detail::fmt_g(lo) + ", " +
                      detail::fmt_g(hi) + "]");
  if (std::isinf(hi)) {
    auto mapped = [&](double u) {
      const double w = 1.0 - u;
      return f(lo + u / w) / (w * w);
    };
    return detail::adaptive_finite(mapped, 0.0, 1.0, cfg);
  }
  try {
    return detail::adaptive_finite(f, lo, hi, cfg);
  } catch (const NumericalError&) {
    // Retry with s = lo + L (3t^2 - 2t^3), which removes inverse square root
    // singularities at either end.
    const double len = hi - lo;
    auto smoothed = [&](double t) {
      const double x = t * t * (3 - 2 * t);
      const double s = t < 0.5 ? lo + len * x : hi - len * (1 - x);
      return f(s) * 6 * len * t * (1 - t);
    };
    try {
      return detail::adaptive_finite(smoothed, 0.0, 1.0, cfg);
    } catch (const NumericalError&) {
    }
    throw;
  }
}

/// Brent's method: bisection safeguarded inverse quadratic interpolation.
/// Requires f(lo)*f(hi) <= 0; the returned root always lies in [lo, hi].
template <class F>
double find_root(F&& f, double lo, double hi, const ToleranceConfig& cfg = {}) {
  if (lo > hi) std::swap(lo, hi);
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (std::isnan(fa) || std::isnan(fb)) throw DomainError("root function is not finite at bracket endpoints");
  if ((fa > 0) == (fb > 0))
    throw NoBracket("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

  double c = a, fc = fa, d = b - a, e = d;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0) == (fc > 0)) {
      c = a, fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b, b = c, c = a;
      fa = fb, fb = fc, fc = fa;
    }
    const double tol = 2 * eps * std::abs(b) + 0.5 * cfg.root_tol * std::max(1.0, std::abs(b));
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0) return std::clamp(b, lo, hi);
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2 * m * s;
        q = 1 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2 * m * q * (q - r) - (b - a) * (r - 1));
        q = (q - 1) * (r - 1) * (s - 1);
      }
      if (p > 0)
        q = -q;
      else
        p = -p;
      if (2 * p < std::min(3 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b, fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
    if (std::isnan(fb)) throw DomainError("root function is not finite inside the bracket");
  }
  throw NonConvergence("root finding exceeded its iteration budget");
}

/// Bisection on a monotone predicate: pred(lo) holds, pred(hi) does not.
/// Returns the last point found to satisfy pred.
template <class Pred>
double bisect_predicate(Pred&& pred, double lo, double hi, const ToleranceConfig& cfg = {}) {
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= cfg.root_tol * std::max(1.0, std::abs(mid)) || mid <= lo || mid >= hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

struct SequencePoint {
  double parameter;
  double value;
};

enum class ExtrapolationMethod { Aitken, PowerLaw, Raw };

inline const char* to_string(ExtrapolationMethod m) {
  switch (m) {
    case ExtrapolationMethod::Aitken: return "aitken";
    case ExtrapolationMethod::PowerLaw: return "power-law";
    case ExtrapolationMethod::Raw: return "raw";
  }
  return "?";
}

struct Extrapolation {
  double limit = 0;
  double err_estimate = 0;
  ExtrapolationMethod method = ExtrapolationMethod::Raw;
};

namespace detail {

// One acceleration stage maps n points to n-2 by fitting the three-term model
// through each consecutive triple. Returns false if the model does not fit
// a convergent sequence somewhere.
inline bool aitken_stage(const std::vector<SequencePoint>& in, std::vector<SequencePoint>& out) {
  out.clear();
  for (std::size_t i = 0; i + 2 < in.size(); ++i) {
    const double d0 = in[i + 1].value - in[i].value;
    const double d1 = in[i + 2].value - in[i + 1].value;
    double limit;
    if (d1 == 0) {
      limit = in[i + 2].value;
    } else {
      const double ratio = d1 / d0;
      if (d0 == 0 || !(std::abs(ratio) < 1)) return false;
      limit = in[i + 2].value + d1 * ratio / (1 - ratio);
    }
    if (!std::isfinite(limit)) return false;
    out.push_back({in[i + 2].parameter, limit});
  }
  return true;
}

// Fit v = L + C x^(-alpha), alpha > 0 unknown, through three points. On a
// geometric parameter grid this is exactly the Aitken step.
inline bool power_stage(const std::vector<SequencePoint>& in, std::vector<SequencePoint>& out) {
  out.clear();
  for (std::size_t i = 0; i + 2 < in.size(); ++i) {
    const auto& p0 = in[i];
    const auto& p1 = in[i + 1];
    const auto& p2 = in[i + 2];
    const double d0 = p1.value - p0.value;
    const double d1 = p2.value - p1.value;
    if (d0 == 0 && d1 == 0) {
      out.push_back({p2.parameter, p2.value});
      continue;
    }
    if (!(p0.parameter > 0) || d0 == 0 || d1 == 0 || (d0 > 0) != (d1 > 0)) return false;
    const double target = d0 / d1;
    const double l0 = std::log(p2.parameter / p0.parameter);
    const double l1 = std::log(p2.parameter / p1.parameter);
    // g(alpha) = (y0 - y1)/(y1 - 1) with y_k = (x_k/x_2)^(-alpha); increasing in alpha.
    const auto g = [&](double alpha) {
      return (std::expm1(alpha * l0) - std::expm1(alpha * l1)) / std::expm1(alpha * l1);
    };
    if (!(target > (l0 - l1) / l1 * (1 + 1e-12))) return false;
    double lo = 1e-9, hi = 1.0;
    while (g(hi) < target) {
      lo = hi;
      hi *= 2;
      if (hi * l0 > 600) return false;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < target ? lo : hi) = mid;
    }
    const double alpha = 0.5 * (lo + hi);
    const double y1m1 = std::expm1(alpha * l1);
    const double amplitude = (p1.value - p2.value) / y1m1;
    const double limit = p2.value - amplitude;
    if (!std::isfinite(limit)) return false;
    out.push_back({p2.parameter, limit});
  }
  return true;
}

// Iterates a stage until fewer than three points remain. Stops early once the
// differences sink to rounding level, or keeps the last good stage when a later
// one no longer fits; fails only if the very first stage does not fit. The
// error is the last inter-stage difference, or after an early stop the last
// difference within the stopped stage.
template <class Stage>
bool accelerate(const std::vector<SequencePoint>& seq, Stage stage, Extrapolation& result) {
  std::vector<SequencePoint> prev = seq, next;
  double prev_last = seq.back().value;
  double err = kInf;
  int stages = 0;
  while (prev.size() >= 3) {
    double scale = 0, spread = 0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      scale = std::max(scale, std::abs(prev[i].value));
      if (i) spread = std::max(spread, std::abs(prev[i].value - prev[i - 1].value));
    }
    const bool at_noise = stages > 0 && spread <= 64 * std::numeric_limits<double>::epsilon() * scale;
    if (at_noise || !stage(prev, next)) {
      if (stages == 0) return false;
      // Judge the stopped stage by its own consistency.
      err = std::abs(prev.back().value - prev[prev.size() - 2].value);
      break;
    }
    err = std::abs(next.back().value - prev_last);
    prev_last = next.back().value;
    prev.swap(next);
    ++stages;
  }
  result.limit = prev_last;
  result.err_estimate = err;
  return std::isfinite(err);
}

}  // namespace detail

/// Estimates the limit of an ordered sequence of (parameter, value) pairs.
///
/// The last extrap_terms entries are accelerated twice: by iterated Aitken
/// delta-squared (exponential model in the index) and by its
/// parameter-aware counterpart that fits L + C*x^(-alpha) with unknown alpha.
/// Both coincide on geometric grids. The candidate with the smaller final
/// inter-stage difference wins. If neither converges, or acceleration moves
/// further than the raw sequence does, the raw last value is returned with
/// the last raw difference as its error.
inline Extrapolation extrapolate_limit(std::span<const SequencePoint> seq, const ToleranceConfig& cfg = {}) {
  if (seq.size() < static_cast<std::size_t>(cfg.extrap_terms) || seq.size() < 3)
    throw InsufficientData("extrapolation needs at least " + std::to_string(cfg.extrap_terms) + " entries, got " +
                           std::to_string(seq.size()));
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (!(seq[i].parameter > seq[i - 1].parameter))
      throw DomainError("extrapolation parameters must be strictly increasing");

  const std::vector<SequencePoint> tail(seq.end() - cfg.extrap_terms, seq.end());
  const double raw_diff = std::abs(tail.back().value - tail[tail.size() - 2].value);

  Extrapolation best{tail.back().value, raw_diff, ExtrapolationMethod::Raw};
  Extrapolation candidate;
  bool have = false;
  if (detail::accelerate(tail, detail::aitken_stage, candidate)) {
    candidate.method = ExtrapolationMethod::Aitken;
    best = candidate;
    have = true;
  }
  if (detail::accelerate(tail, detail::power_stage, candidate)) {
    candidate.method = ExtrapolationMethod::PowerLaw;
    if (!have || candidate.err_estimate < best.err_estimate) best = candidate;
    have = true;
  }
  if (!have || best.err_estimate > raw_diff) return {tail.back().value, raw_diff, ExtrapolationMethod::Raw};
  return best;
}

inline Extrapolation extrapolate_limit(const std::vector<SequencePoint>& seq, const ToleranceConfig& cfg = {}) {
  return extrapolate_limit(std::span<const SequencePoint>(seq), cfg);
}

/// Geometric grid of n points from lo to hi inclusive (lo > 0).
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

}  // namespace isomass
