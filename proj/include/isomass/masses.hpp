#pragma once

// Quasilocal masses of centered spheres and their limits along coordinate
// sphere exhaustions.
//
//   m_p(S) = (|Omega| - (4pi/3) ncap_p^(3/(3-p))) / (2 pi p ncap_p^(2/(3-p)))
//
// compares the enclosed volume with the Euclidean ball of equal p-capacity.
// At p = 1 the capacity is the outward minimizing hull area over 4 pi.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isomass/capacity.hpp"
#include "isomass/errors.hpp"
#include "isomass/geometry.hpp"
#include "isomass/numerics.hpp"
#include "isomass/specfun.hpp"

namespace isomass {

/// Stand-in for an infinite mass; always paired with an explicit flag.
inline constexpr double kMassSentinel = std::numeric_limits<double>::max();

inline constexpr const char* kExhaustionCaveat =
    "limits are taken along coordinate sphere exhaustions only and bound the total mass from below";

struct MassValue {
  double value = 0;
  bool infinite = false;
};

/// Iso-p-capacitary mass of the sphere at rho; p = 1 uses the hull capacity.
inline MassValue quasilocal_mass(const RadialMetric& m, double rho, double p, const ToleranceConfig& cfg = {}) {
  if (p != 1) check_exponent(p);
  const CapacityResult cap = capacity(m, rho, p, cfg);
  if (cap.parabolic || !(cap.ncap > 0)) return {kMassSentinel, true};
  const double volume = enclosed_volume(m, rho, cfg);
  // Radius of the Euclidean ball with the same capacity.
  const double radius = std::exp(std::log(cap.ncap) / (3 - p));
  return {(volume - 4 * kPi / 3 * radius * radius * radius) / (2 * kPi * p * radius * radius), false};
}

/// Huisken's quasilocal isoperimetric mass (2/A)(V - A^(3/2)/(6 sqrt(pi))).
inline double huisken_mass(const RadialMetric& m, double rho, const ToleranceConfig& cfg = {}) {
  const SphereData s = sphere_data(m, rho, cfg);
  return 2 / s.area * (s.volume - std::pow(s.area, 1.5) / (6 * std::sqrt(kPi)));
}

enum class Verdict { Converged, Divergent, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "CONVERGED";
    case Verdict::Divergent: return "DIVERGENT";
    case Verdict::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct MassReport {
  std::string kind = "iso-p";  // "iso-p" or "huisken"
  double p = 0;
  std::vector<double> radii;
  std::vector<double> quasilocal;
  bool infinite = false;  // some quasilocal mass is infinite
  double extrapolated_mass = 0;
  double err_estimate = 0;
  ExtrapolationMethod method = ExtrapolationMethod::Raw;
  Verdict verdict = Verdict::Indeterminate;
  std::string note = kExhaustionCaveat;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void finish_report(MassReport& rep, const ToleranceConfig& cfg, double report_tol) {
  if (rep.infinite) {
    rep.extrapolated_mass = kMassSentinel;
    rep.err_estimate = kMassSentinel;
    rep.verdict = Verdict::Divergent;
    return;
  }
  std::vector<SequencePoint> seq;
  for (std::size_t i = 0; i < rep.radii.size(); ++i) seq.push_back({rep.radii[i], rep.quasilocal[i]});
  const Extrapolation e = extrapolate_limit(seq, cfg);
  rep.extrapolated_mass = e.limit;
  rep.err_estimate = e.err_estimate;
  rep.method = e.method;

  const auto& q = rep.quasilocal;
  std::vector<double> last_half;
  for (std::size_t i = q.size() / 2; i < q.size(); ++i) last_half.push_back(std::abs(q[i]));
  const bool blows_up = std::abs(q.back()) > 10 * std::max(median(last_half), report_tol);

  // Growth that does not slow down and that acceleration could not tame.
  // Drift below report_tol is rounding, not growth.
  bool steady_growth = e.method == ExtrapolationMethod::Raw && q.size() >= 3 &&
                       std::abs(q.back() - q.front()) > report_tol * std::max(1.0, median(last_half));
  for (std::size_t i = 2; steady_growth && i < q.size(); ++i) {
    const double d0 = q[i - 1] - q[i - 2], d1 = q[i] - q[i - 1];
    steady_growth = d0 != 0 && (d0 > 0) == (d1 > 0) && std::abs(d1) >= std::abs(d0);
  }

  if (blows_up || steady_growth)
    rep.verdict = Verdict::Divergent;
  else if (rep.err_estimate <= report_tol * std::max(1.0, std::abs(rep.extrapolated_mass)))
    rep.verdict = Verdict::Converged;
  else
    rep.verdict = Verdict::Indeterminate;
}

inline void check_grid(const std::vector<double>& r_grid, const ToleranceConfig& cfg) {
  if (r_grid.size() < static_cast<std::size_t>(cfg.extrap_terms))
    throw ConfigError("r_grid needs at least extrap_terms = " + std::to_string(cfg.extrap_terms) + " radii");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1])) throw ConfigError("r_grid must be strictly increasing");
}

}  // namespace detail

/// Geometric grid with ratio 2 starting at 50 capacitary radii (p = 2) of the
/// domain start sphere, or at 50 when that sphere has no area.
inline std::vector<double> default_r_grid(const RadialMetric& m, const ToleranceConfig& cfg = {}) {
  double radius = 1;
  if (m.area_at(m.domain_start) > 0) {
    const CapacityResult c = p_capacity(m, m.domain_start, 2.0, cfg);
    if (!c.parabolic) radius = std::max(1.0, c.ncap);
  }
  double base = 50 * radius;
  if (base <= m.domain_start) base += m.domain_start;
  std::vector<double> grid;
  for (int k = 0; k < cfg.extrap_terms; ++k) grid.push_back(base * std::ldexp(1.0, k));
  return grid;
}

/// Quasilocal masses along the exhaustion r_grid and their extrapolated limit.
inline MassReport total_mass(const RadialMetric& m, double p, const std::vector<double>& r_grid,
                             const ToleranceConfig& cfg = {}, double report_tol = 1e-3) {
  detail::check_grid(r_grid, cfg);
  MassReport rep;
  rep.p = p;
  rep.radii = r_grid;
  for (double r : r_grid) {
    const MassValue v = quasilocal_mass(m, r, p, cfg);
    rep.quasilocal.push_back(v.value);
    rep.infinite = rep.infinite || v.infinite;
  }
  detail::finish_report(rep, cfg, report_tol);
  return rep;
}

/// The Huisken isoperimetric mass sequence along r_grid.
inline MassReport huisken_total_mass(const RadialMetric& m, const std::vector<double>& r_grid,
                                     const ToleranceConfig& cfg = {}, double report_tol = 1e-3) {
  detail::check_grid(r_grid, cfg);
  MassReport rep;
  rep.kind = "huisken";
  rep.p = 1;
  rep.radii = r_grid;
  for (double r : r_grid) rep.quasilocal.push_back(huisken_mass(m, r, cfg));
  detail::finish_report(rep, cfg, report_tol);
  return rep;
}

struct EquivalenceVerdict {
  std::vector<double> p_grid;
  std::vector<MassReport> masses;  // one per p, then the Huisken sequence
  double max_pairwise_gap = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Total masses for every p plus the Huisken sequence; passes when all limits are
/// finite and agree pairwise within tol.
inline EquivalenceVerdict equivalence_report(const RadialMetric& m, const std::vector<double>& p_grid,
                                             const std::vector<double>& r_grid, double tol,
                                             const ToleranceConfig& cfg = {}) {
  EquivalenceVerdict out;
  out.p_grid = p_grid;
  out.tolerance = tol;
  for (double p : p_grid) {
    if (!(p >= 1 && p <= kMaxExponent)) throw BadExponent("p_grid entries must lie in [1, 3 - 1e-3]");
    out.masses.push_back(total_mass(m, p, r_grid, cfg));
  }
  out.masses.push_back(huisken_total_mass(m, r_grid, cfg));
  bool finite = true;
  double lo = kInf, hi = -kInf;
  for (const auto& r : out.masses) {
    if (r.infinite || r.verdict == Verdict::Divergent) finite = false;
    lo = std::min(lo, r.extrapolated_mass);
    hi = std::max(hi, r.extrapolated_mass);
  }
  out.max_pairwise_gap = finite ? hi - lo : kMassSentinel;
  out.pass = finite && out.max_pairwise_gap <= tol;
  return out;
}

struct BmxReport {
  double rho = 0;
  double p = 0;
  double lhs = 0;  // ncap_p of the sphere
  double rhs = 0;  // (A/4pi)^((3-p)/2) 2F1(...; 1 - W/16pi)^(-(p-1))
  double slack = 0;
  bool pass = false;
};

/// Capacity bound of the sphere at rho in terms of its area and Willmore energy.
inline BmxReport bmx_bound_check(const RadialMetric& m, double rho, double p, const ToleranceConfig& cfg = {}) {
  const CapacityResult cap = p_capacity(m, rho, p, cfg);
  const SphereData s = sphere_local(m, rho);
  const double x = 1 - s.willmore / (16 * kPi);
  const double f = gauss_2f1(p, std::min(x, 1.0), cfg);
  BmxReport rep;
  rep.rho = s.rho;
  rep.p = p;
  rep.lhs = cap.ncap;
  rep.rhs = std::pow(s.area / (4 * kPi), (3 - p) / 2) * std::pow(f, -(p - 1));
  rep.slack = rep.rhs - rep.lhs;
  rep.pass = rep.lhs <= rep.rhs * (1 + 1e-8);
  return rep;
}

struct IsoperimetricRow {
  double radius = 0;
  double lhs = 0;  // |Omega|
  double rhs = 0;  // |dOmega|^(3/2)/(6 sqrt(pi)) + (m/2)|dOmega|
  bool pass = false;
};

struct IsoperimetricReport {
  double m_bound = 0;
  std::vector<IsoperimetricRow> rows;
  std::optional<double> threshold;  // smallest radius beyond which every row passes
};

/// |Omega| <= |dOmega|^(3/2)/(6 sqrt(pi)) + (m_bound/2)|dOmega| on the grid.
inline IsoperimetricReport asymptotic_isoperimetric_check(const RadialMetric& m, double m_bound,
                                                          const std::vector<double>& r_grid,
                                                          const ToleranceConfig& cfg = {}) {
  IsoperimetricReport rep;
  rep.m_bound = m_bound;
  double volume = 0, prev = m.domain_start;
  for (double r : r_grid) {
    if (r < prev) throw ConfigError("r_grid must be increasing");
    volume += detail::volume_between(m, prev, r, cfg).value;
    prev = r;
    const double area = m.area_at(r);
    const double rhs = std::pow(area, 1.5) / (6 * std::sqrt(kPi)) + 0.5 * m_bound * area;
    rep.rows.push_back({r, volume, rhs, volume <= rhs});
  }
  for (std::size_t i = rep.rows.size(); i-- > 0;) {
    if (!rep.rows[i].pass) break;
    rep.threshold = rep.rows[i].radius;
  }
  return rep;
}

namespace detail {

inline std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// JSON object {metric, p, radii[], quasilocal[], extrapolated, err, verdict}.
inline nlohmann::ordered_json mass_json(const MassReport& rep, const std::string& metric_label) {
  return {{"metric", metric_label},       {"p", rep.p},
          {"radii", rep.radii},           {"quasilocal", rep.quasilocal},
          {"extrapolated", rep.extrapolated_mass}, {"err", rep.err_estimate},
          {"verdict", to_string(rep.verdict)}};
}

inline void write_mass_json(std::ostream& out, const MassReport& rep, const std::string& metric_label) {
  out << mass_json(rep, metric_label).dump();
}

inline void write_mass_csv_header(std::ostream& out) { out << "metric,p,radius,quasilocal,extrapolated,err,verdict\n"; }

/// One row per radius; the limit columns repeat on every row.
inline void write_mass_csv_rows(std::ostream& out, const MassReport& rep, const std::string& metric_label) {
  std::string label = metric_label;
  if (label.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char c : label) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    label = q + "\"";
  }
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    out << label << ',' << detail::num17(rep.p) << ',' << detail::num17(rep.radii[i]) << ','
        << detail::num17(rep.quasilocal[i]) << ',' << detail::num17(rep.extrapolated_mass) << ','
        << detail::num17(rep.err_estimate) << ',' << to_string(rep.verdict) << '\n';
}

}  // namespace isomass
