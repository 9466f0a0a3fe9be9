#pragma once

// Weak inverse mean curvature flow of centered spheres.
//
// In rotational symmetry the level sets of the weak solution are centered
// spheres with area hull_area * e^t. Where a sphere fails to be outward
// minimizing the flow jumps: the skipped radii are those where the area
// exceeds its envelope E(s) = min over u >= s of area(u).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "isomass/errors.hpp"
#include "isomass/geometry.hpp"
#include "isomass/numerics.hpp"

namespace isomass {

struct Hull {
  double rho_star = 0;
  double hull_area = 0;
};

struct SmoothSegment {
  double t_start = 0;
  double t_end = 0;
  double rho_start = 0;
  double rho_end = 0;
};

struct Jump {
  double t = 0;
  double rho_before = 0;
  double rho_after = 0;
  bool initial = false;  // the jump from rho0 to its hull at t = 0 (area drops)
};

using FlowEvent = std::variant<SmoothSegment, Jump>;

struct FlowSample {
  double t = 0;
  SphereData sphere;
  bool jump = false;  // a jump happened in (previous t, t]
};

struct FlowTrack {
  double rho0 = 0;
  double initial_area = 0;  // hull area, the area at t = 0
  std::vector<FlowEvent> events;
  std::vector<FlowSample> samples;
};

namespace detail {

// Area samples of a metric on [rho0, cutoff] with refinement helpers.
class AreaScan {
 public:
  AreaScan(const RadialMetric& m, double rho0, const ToleranceConfig& cfg) : m_(m), cfg_(cfg) {
    x_.push_back(rho0);
    for (double x : probe_grid(m, cfg))
      if (x > rho0 * (1 + 1e-12) && x > rho0) x_.push_back(x);
    if (x_.size() < 2) x_.push_back(std::max(2 * rho0, rho0 + 1));
    area_.reserve(x_.size());
    for (double x : x_) area_.push_back(m.area_at(x));
  }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& area() const { return area_; }

  // d(area)/dx up to the positive factor 8 pi a.
  double slope(double s) const {
    if (m_.gauge == Gauge::Areal) return 1.0;
    return m_.profile_at(s).d1;
  }

  // Local minimum of the area near grid index i, refined to a' = 0.
  double refine_min(std::size_t i) const {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(i + 1, x_.size() - 1);
    if (i == 0 && slope(x_[0]) >= 0) return x_[0];
    double a = x_[lo], b = x_[hi];
    // Pick the half-bracket over which a' changes sign from - to +.
    if (slope(a) < 0 && slope(x_[i]) >= 0) b = x_[i];
    else if (slope(x_[i]) <= 0 && slope(b) > 0) a = x_[i];
    else return x_[i];
    const auto g = [&](double s) { return slope(s); };
    return find_root(g, a, b, cfg_);
  }

  // Outermost s in [x_i, x_{i+1}] with area(s) = target, given area(x_i) <= target < area(x_{i+1}).
  double crossing(double lo, double hi, double target) const {
    const auto g = [&](double s) { return m_.area_at(s) - target; };
    return find_root(g, lo, hi, cfg_);
  }

  // Outermost radius whose area does not exceed target.
  double outermost_at_most(double target) const {
    std::size_t i = x_.size();
    while (i > 0 && area_[i - 1] > target) --i;
    if (i == 0) throw DomainError("target area lies below the hull area");
    --i;
    if (i + 1 < x_.size()) return crossing(x_[i], x_[i + 1], target);
    // Beyond the probe grid the area is assumed to grow; bracket outward.
    double lo = x_.back(), hi = 2 * lo;
    for (int k = 0; m_.area_at(hi) <= target; ++k) {
      if (k > 2000 || !std::isfinite(hi)) throw NoBracket("area never exceeds the flow target");
      lo = hi;
      hi *= 2;
    }
    return crossing(lo, hi, target);
  }

 private:
  const RadialMetric& m_;
  ToleranceConfig cfg_;
  std::vector<double> x_, area_;
};

}  // namespace detail

/// Outermost radius s >= rho0 minimizing the area of centered spheres.
inline Hull outward_hull(const RadialMetric& m, double rho0, const ToleranceConfig& cfg = {}) {
  detail::check_radius(m, rho0);
  rho0 = std::max(rho0, m.domain_start);
  if (m.gauge == Gauge::Areal) return {rho0, m.area_at(rho0)};
  const detail::AreaScan scan(m, rho0, cfg);
  const auto& x = scan.x();
  const auto& area = scan.area();

  // Candidates are the local minima of the sampled area.
  Hull best{x[0], kInf};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool left_ok = i == 0 || area[i] <= area[i - 1];
    const bool right_ok = i + 1 == x.size() || area[i] <= area[i + 1];
    if (!left_ok || !right_ok) continue;
    const double s = i + 1 == x.size() ? x[i] : scan.refine_min(i);
    const double a = m.area_at(s);
    if (a <= best.hull_area * (1 + 1e-13)) best = {s, std::min(a, best.hull_area)};
  }
  best.hull_area = m.area_at(best.rho_star);
  return best;
}

/// Weak IMCF from the sphere at rho0, sampled at n_samples uniform times on [0, t_max].
inline FlowTrack weak_imcf(const RadialMetric& m, double rho0, double t_max, int n_samples,
                           const ToleranceConfig& cfg = {}) {
  if (!(t_max > 0)) throw ConfigError("t_max must be positive");
  if (n_samples < 2) throw ConfigError("a flow needs at least two samples");
  const Hull hull = outward_hull(m, rho0, cfg);
  FlowTrack track;
  track.rho0 = rho0;
  track.initial_area = hull.hull_area;

  const detail::AreaScan scan(m, hull.rho_star, cfg);
  const auto& x = scan.x();
  const auto& area = scan.area();

  // Envelope from the outside in; runs with area above it are skipped.
  std::vector<double> envelope(area.size());
  envelope.back() = area.back();
  for (std::size_t i = area.size() - 1; i-- > 0;) envelope[i] = std::min(area[i], envelope[i + 1]);

  std::vector<Jump> jumps;
  if (hull.rho_star > rho0 * (1 + 1e-12)) jumps.push_back({0.0, rho0, hull.rho_star, true});
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(area[i] > envelope[i]) || area[i - 1] > envelope[i - 1]) continue;
    std::size_t j = i;
    while (j < x.size() && area[j] > envelope[j]) ++j;
    if (j == x.size()) break;
    const double after = scan.refine_min(j);
    const double level = m.area_at(after);
    // The run starts between x[i-1] and x[i]; area(x[i-1]) <= level there.
    double before = x[i - 1];
    if (m.area_at(before) < level) before = scan.crossing(x[i - 1], x[i], level);
    jumps.push_back({std::log(level / hull.hull_area), before, after, false});
    i = j;
  }

  const double tmax_eps = t_max * (1 + 1e-15);
  double t_prev = 0, rho_prev = hull.rho_star;
  for (const Jump& jp : jumps) {
    if (jp.t > tmax_eps) break;
    if (!jp.initial) track.events.emplace_back(SmoothSegment{t_prev, jp.t, rho_prev, jp.rho_before});
    track.events.emplace_back(jp);
    t_prev = jp.t;
    rho_prev = jp.rho_after;
  }

  std::size_t next_jump = 0;
  double volume = enclosed_volume(m, hull.rho_star, cfg);
  double rho_last = hull.rho_star;
  for (int k = 0; k < n_samples; ++k) {
    const double t = t_max * k / (n_samples - 1);
    const double target = hull.hull_area * std::exp(t);
    const double rho = k == 0 ? hull.rho_star : scan.outermost_at_most(target);
    bool jumped = false;
    for (; next_jump < jumps.size() && jumps[next_jump].t <= t; ++next_jump) jumped = true;
    volume += detail::volume_between(m, rho_last, rho, cfg).value;
    rho_last = rho;
    FlowSample s;
    s.t = t;
    s.sphere = sphere_local(m, rho);
    s.sphere.volume = volume;
    s.jump = jumped;
    track.samples.push_back(s);
  }
  track.events.emplace_back(SmoothSegment{t_prev, t_max, rho_prev, rho_last});
  return track;
}

struct GerochReport {
  bool monotone = true;
  double worst_drop = 0;  // largest decrease of m_H between consecutive samples (0 if none)
  std::vector<double> hawking_mass;
};

/// Monotonicity of the Hawking mass along a sampled flow.
inline GerochReport geroch_check(const FlowTrack& track) {
  GerochReport rep;
  for (const auto& s : track.samples) rep.hawking_mass.push_back(s.sphere.hawking_mass);
  for (std::size_t i = 1; i < rep.hawking_mass.size(); ++i) {
    const double prev = rep.hawking_mass[i - 1], cur = rep.hawking_mass[i];
    rep.worst_drop = std::max(rep.worst_drop, prev - cur);
    if (cur < prev - 1e-8 * std::max(1.0, std::abs(prev))) rep.monotone = false;
  }
  return rep;
}

struct WillmoreLimit {
  double limit_estimate = 0;
  double deviation_from_16pi = 0;
  double err_estimate = 0;
};

/// Extrapolated Willmore energy over the last tail_fraction of the samples.
inline WillmoreLimit willmore_limit(const FlowTrack& track, double tail_fraction, const ToleranceConfig& cfg = {}) {
  if (!(tail_fraction > 0 && tail_fraction < 1)) throw ConfigError("tail_fraction must lie in (0, 1)");
  if (track.samples.size() < 10) throw InsufficientData("willmore_limit needs at least 10 samples");
  const auto n = track.samples.size();
  const auto take = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(tail_fraction * n)),
                                          static_cast<std::size_t>(cfg.extrap_terms));
  if (take > n) throw InsufficientData("tail holds fewer samples than extrap_terms");
  std::vector<SequencePoint> seq;
  for (std::size_t i = n - take; i < n; ++i) seq.push_back({track.samples[i].t, track.samples[i].sphere.willmore});
  const Extrapolation e = extrapolate_limit(seq, cfg);
  return {e.limit, e.limit - 16 * kPi, e.err_estimate};
}

/// CSV with columns t,rho,area,volume,H,m_H,willmore,R,jump_flag.
inline void write_flow_csv(std::ostream& out, const FlowTrack& track) {
  out << "t,rho,area,volume,H,m_H,willmore,R,jump_flag\n";
  char buf[512];
  for (const auto& s : track.samples) {
    const auto& d = s.sphere;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", s.t, d.rho, d.area,
                  d.volume, d.mean_curvature, d.hawking_mass, d.willmore, d.scalar_curvature, s.jump ? 1 : 0);
    out << buf;
  }
}

}  // namespace isomass
