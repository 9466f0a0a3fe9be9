#pragma once

// Normalized p-capacities of centered spheres and the radial p-capacitary
// potential. With the radial energy integral
//   I_p(rho0) = int_rho0^inf (area(s))^(-1/(p-1)) * lapse(s) ds
// the minimized energy is flux = I_p^(-(p-1)) and
//   ncap_p = (1/4pi) ((p-1)/(3-p))^(p-1) * flux,
// normalized so that a Euclidean ball of radius r has ncap_p = r^(3-p).
// The radial competitor is taken as the minimizer.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isomass/errors.hpp"
#include "isomass/flow.hpp"
#include "isomass/geometry.hpp"
#include "isomass/numerics.hpp"

namespace isomass {

inline constexpr double kMinExponent = 1 + 1e-3;
inline constexpr double kMaxExponent = 3 - 1e-3;

struct CapacityResult {
  double p = 0;
  double rho0 = 0;
  double ncap = 0;
  double flux = 0;
  double err_estimate = 0;  // absolute, on ncap
  bool parabolic = false;
  double hull_radius = 0;  // p = 1 only: outermost minimizing radius
};

inline void check_exponent(double p) {
  if (!(p >= kMinExponent && p <= kMaxExponent))
    throw BadExponent("p must lie in [" + std::to_string(kMinExponent) + ", " + std::to_string(kMaxExponent) +
                      "], got " + std::to_string(p));
}

namespace detail {

// log of the radial energy density (area^(-1/(p-1)) * lapse) as a function of
// log s. Past a far radius the density is continued as a power law, so the
// tail substitution can reach arbitrarily large s without evaluating the
// profile there.
class EnergyDensity {
 public:
  EnergyDensity(const RadialMetric& m, double p) : m_(m), exponent_(1 / (p - 1)) {}

  double log_at(double log_s) const {
    if (log_s > log_far_s_) return log_far_ - decay_ * (log_s - log_far_s_);
    return log_direct(log_s);
  }

  double log_direct(double log_s) const {
    const double s = std::exp(log_s);
    double log_area, log_lapse = 0;
    if (m_.gauge == Gauge::Geodesic) {
      const double a = m_.profile_at(s).value;
      if (!(a > 0)) throw DomainError("warping profile must be positive at " + std::to_string(s));
      log_area = std::log(4 * kPi) + 2 * std::log(a);
    } else {
      const double f = m_.profile_at(s).value;
      if (!(f > 0)) throw DomainError("areal profile f must be positive at " + std::to_string(s));
      log_area = std::log(4 * kPi) + 2 * log_s;
      log_lapse = -0.5 * std::log(f);
    }
    return -exponent_ * log_area + log_lapse;
  }

  // Local decay exponent q with density ~ s^(-q) near s.
  double local_decay(double s) const {
    const double h = std::log(2.0);
    return -(log_direct(std::log(s) + h) - log_direct(std::log(s))) / h;
  }

  void set_far_field(double far) {
    decay_ = local_decay(far);
    log_far_s_ = std::log(far);
    log_far_ = log_direct(log_far_s_);
  }

  double exponent() const { return exponent_; }

 private:
  const RadialMetric& m_;
  double exponent_;
  double decay_ = 0;
  double log_far_s_ = kInf;
  double log_far_ = 0;
};

struct EnergyIntegral {
  double log_scale = 0;  // integral = exp(log_scale) * value
  double value = 0;
  double err = 0;
  bool divergent = false;
};

// int_lo^inf density, evaluated relative to exp(log_scale).
//
// [lo, S] is split into decades (the first uses s = lo + u^2 at a throat);
// the tail [S, inf) uses s = S w^(-k) with k = 1/(q-1), which turns a
// density ~ s^(-q) into a constant in w, however slowly it decays.
// The integral is flagged divergent when the two decades past S contribute
// non-negligibly and the second is at least as large as the first.
inline EnergyIntegral energy_integral(const RadialMetric& m, EnergyDensity& density, double lo, double log_scale,
                                      const ToleranceConfig& cfg) {
  EnergyIntegral out;
  out.log_scale = log_scale;
  const double S = std::max(cfg.cutoff_radius, 10 * std::max(lo, 1.0));
  const auto rel = [&](double s) { return std::exp(density.log_direct(std::log(s)) - log_scale); };

  const bool throat = m.gauge == Gauge::Areal && m.profile_at(lo).value <= 1e-12 * std::max(1.0, lo);
  // Near p = 1 the density falls off within lo/q of lo; panels start at that
  // width and double until they reach decades.
  double width = 0.25 * std::max(lo, 1e-3);
  if (!throat) width /= std::max(1.0, density.local_decay(lo));
  double a = lo;
  bool first = true;
  while (a < S) {
    const double b = std::min({S, a + width, std::max(10 * a, a + 1)});
    width *= 2;
    QuadResult r;
    if (first && throat) {
      const ThroatLapse lapse(m, lo);
      const double ex = density.exponent();
      r = integrate(
          [&](double u) {
            const double s = lo + u * u;
            return std::exp(-ex * std::log(4 * kPi * s * s) - log_scale) * lapse(u);
          },
          0.0, std::sqrt(b - lo), cfg);
    } else {
      r = integrate(rel, a, b, cfg);
    }
    out.value += r.value;
    out.err += r.err_estimate;
    a = b;
    first = false;
  }

  const QuadResult d1 = integrate(rel, S, 10 * S, cfg);
  const QuadResult d2 = integrate(rel, 10 * S, 100 * S, cfg);
  if (d1.value > cfg.quad_rel_tol * out.value && d2.value >= (1 - 1e-6) * d1.value) {
    out.divergent = true;
    return out;
  }

  double q = density.local_decay(S);
  if (!(q > 1)) q = 1 - std::log10(d2.value / d1.value);
  if (!(q > 1)) {
    out.divergent = true;
    return out;
  }
  density.set_far_field(100 * S);
  const double k = 1 / (q - 1);
  const double log_S = std::log(S), log_k = std::log(k);
  const QuadResult tail = integrate(
      [&](double w) {
        if (w <= 0) return 0.0;
        const double log_s = log_S - k * std::log(w);
        const double v = density.log_at(log_s) - log_scale + log_k + log_S - (k + 1) * std::log(w);
        return std::exp(v);
      },
      0.0, 1.0, cfg);
  out.value += tail.value;
  out.err += tail.err_estimate;
  return out;
}

// Smallest area of centered spheres on the probe grid beyond rho0.
inline double reference_area(const RadialMetric& m, double rho0, const ToleranceConfig& cfg) {
  double best = m.area_at(rho0);
  for (double x : probe_grid(m, cfg))
    if (x > rho0) best = std::min(best, m.area_at(x));
  return best;
}

}  // namespace detail

/// Normalized p-capacity of the centered sphere at rho0, 1 < p < 3.
inline CapacityResult p_capacity(const RadialMetric& m, double rho0, double p, const ToleranceConfig& cfg = {}) {
  check_exponent(p);
  detail::check_radius(m, rho0);
  rho0 = std::max(rho0, m.domain_start);
  CapacityResult res;
  res.p = p;
  res.rho0 = rho0;
  if (m.area_at(rho0) <= 0) return res;  // a point has zero capacity

  detail::EnergyDensity density(m, p);
  const double ref_area = detail::reference_area(m, rho0, cfg);
  const double log_scale = -std::log(ref_area) / (p - 1);
  const detail::EnergyIntegral I = detail::energy_integral(m, density, rho0, log_scale, cfg);
  if (I.divergent) {
    res.parabolic = true;
    return res;
  }
  // flux = I^(-(p-1)) = ref_area * value^(-(p-1))
  res.flux = ref_area * std::pow(I.value, -(p - 1));
  res.ncap = std::pow((p - 1) / (3 - p), p - 1) * res.flux / (4 * kPi);
  res.err_estimate = res.ncap * (p - 1) * I.err / I.value;
  return res;
}

/// p = 1 capacity: area of the outward minimizing hull over 4 pi.
inline CapacityResult one_capacity(const RadialMetric& m, double rho0, const ToleranceConfig& cfg = {}) {
  const Hull hull = outward_hull(m, rho0, cfg);
  CapacityResult res;
  res.p = 1;
  res.rho0 = std::max(rho0, m.domain_start);
  res.ncap = hull.hull_area / (4 * kPi);
  res.flux = hull.hull_area;
  res.hull_radius = hull.rho_star;
  return res;
}

/// Dispatches p = 1 to one_capacity and p > 1 to p_capacity.
inline CapacityResult capacity(const RadialMetric& m, double rho0, double p, const ToleranceConfig& cfg = {}) {
  if (p == 1) return one_capacity(m, rho0, cfg);
  return p_capacity(m, rho0, p, cfg);
}

struct PotentialSample {
  double rho = 0;
  double u = 0;  // capacitary potential, 1 on the inner sphere
  double w = 0;  // -(p-1) log u
};

struct PotentialCurve {
  double p = 0;
  double rho0 = 0;
  double flux = 0;
  std::vector<PotentialSample> samples;
};

/// Radial p-capacitary potential u(rho) = I_p(rho) / I_p(rho0) on a geometric grid.
inline PotentialCurve capacitary_potential(const RadialMetric& m, double rho0, double p, int n_samples = 200,
                                           const ToleranceConfig& cfg = {}) {
  const CapacityResult cap = p_capacity(m, rho0, p, cfg);
  if (cap.parabolic) throw ParabolicMetric("the metric is p-parabolic; no capacitary potential exists");
  if (cap.flux <= 0) throw DomainError("the inner sphere has zero area");
  rho0 = cap.rho0;
  PotentialCurve curve{p, rho0, cap.flux, {}};

  detail::EnergyDensity density(m, p);
  const double log_scale = -std::log(detail::reference_area(m, rho0, cfg)) / (p - 1);
  const double total = detail::energy_integral(m, density, rho0, log_scale, cfg).value;
  const double hi = std::max(cfg.cutoff_radius, 10 * std::max(rho0, 1.0));
  const auto grid = geometric_grid(std::max(rho0, 1e-300), hi, static_cast<std::size_t>(std::max(n_samples, 2)));

  // Tails are accumulated from the outside in so only positive terms are summed.
  const auto rel = [&](double s) { return std::exp(density.log_direct(std::log(s)) - log_scale); };
  std::vector<double> x(grid.begin(), grid.end());
  x.front() = rho0;
  std::vector<double> tail(x.size());
  tail.back() = detail::energy_integral(m, density, x.back(), log_scale, cfg).value;
  for (std::size_t i = x.size() - 1; i-- > 1;) tail[i] = tail[i + 1] + integrate(rel, x[i], x[i + 1], cfg).value;
  tail.front() = total;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = std::clamp(tail[i] / total, 0.0, 1.0);
    curve.samples.push_back({x[i], u, u > 0 ? -(p - 1) * std::log(u) : kInf});
  }
  curve.samples.front().u = 1;
  curve.samples.front().w = 0;
  return curve;
}

struct HolderSample {
  double t = 0;    // potential level, the region is {u >= t}
  double rho = 0;  // sphere bounding the region
  double lhs = 0;  // area^p
  double rhs = 0;  // Ncap_p * (area / |grad u|)^(p-1)
  double relative_gap = 0;
  bool pass = true;
};

struct HolderReport {
  double p = 0;
  double rho0 = 0;
  double max_relative_gap = 0;
  bool pass = true;
  std::vector<HolderSample> samples;
};

/// Checks area^p <= Ncap_p * (-V'(t))^(p-1) along the level sets of the
/// radial p-capacitary potential, with -V'(t) = area / |grad u|.
inline HolderReport verify_flux_holder(const RadialMetric& m, double rho0, double p, int n_samples,
                                       const ToleranceConfig& cfg = {}) {
  const PotentialCurve curve = capacitary_potential(m, rho0, p, n_samples, cfg);
  const CapacityResult cap = p_capacity(m, rho0, p, cfg);
  const double big_ncap = 4 * kPi * std::pow((3 - p) / (p - 1), p - 1) * cap.ncap;
  const double flux_root = std::pow(cap.flux, 1 / (p - 1));
  HolderReport rep{p, curve.rho0, 0, true, {}};
  for (const auto& s : curve.samples) {
    if (!(s.u > 0)) continue;
    const double area = m.area_at(s.rho);
    // |grad u| is du/d(arclength) = flux^(1/(p-1)) area^(-1/(p-1)) in either gauge.
    const double grad = flux_root * std::pow(area, -1 / (p - 1));
    HolderSample h;
    h.t = s.u;
    h.rho = s.rho;
    h.lhs = std::pow(area, p);
    h.rhs = big_ncap * std::pow(area / grad, p - 1);
    h.relative_gap = (h.rhs - h.lhs) / h.lhs;
    h.pass = h.lhs <= h.rhs * (1 + 1e-8);
    rep.max_relative_gap = std::max(rep.max_relative_gap, std::abs(h.relative_gap));
    rep.pass = rep.pass && h.pass;
    rep.samples.push_back(h);
  }
  return rep;
}

}  // namespace isomass
