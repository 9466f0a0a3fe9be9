#pragma once

// Rotationally symmetric Riemannian 3-manifolds given by one radial profile,
// either in geodesic gauge  g = drho^2 + a(rho)^2 * round sphere
// or in areal gauge         g = dr^2 / f(r) + r^2 * round sphere.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "isomass/errors.hpp"
#include "isomass/numerics.hpp"
#include "isomass/profile_dsl.hpp"

namespace isomass {

enum class Gauge { Geodesic, Areal };
enum class BoundaryKind { None, Minimal };

inline const char* to_string(Gauge g) { return g == Gauge::Geodesic ? "geodesic" : "areal"; }

/// Profile value with its first two derivatives in the radial coordinate.
struct Jet {
  double value = 0;
  double d1 = 0;
  double d2 = 0;
  bool nonsmooth = false;
};

/// Piecewise interpolated profile. Either monotone cubic (Fritsch-Carlson) on
/// values only, or quintic Hermite when nodal first and second derivatives are
/// known. Beyond the last node the profile continues linearly.
class TabulatedProfile {
 public:
  static TabulatedProfile monotone_cubic(std::vector<double> x, std::vector<double> y) {
    check_nodes(x, y.size());
    const std::size_t n = x.size();
    std::vector<double> slope(n, 0.0), secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    slope[0] = secant[0];
    slope[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (secant[i - 1] * secant[i] <= 0) {
        slope[i] = 0;
      } else {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        const double w0 = 2 * h1 + h0, w1 = h1 + 2 * h0;
        slope[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
      }
    }
    auto data = std::make_shared<Data>();
    data->x = std::move(x);
    data->y = std::move(y);
    data->d1 = std::move(slope);
    data->quintic = false;
    return TabulatedProfile(std::move(data));
  }

  static TabulatedProfile quintic_hermite(std::vector<double> x, std::vector<double> y, std::vector<double> d1,
                                          std::vector<double> d2) {
    check_nodes(x, y.size());
    if (d1.size() != x.size() || d2.size() != x.size()) throw ConfigError("table derivative columns mismatch");
    auto data = std::make_shared<Data>();
    data->x = std::move(x);
    data->y = std::move(y);
    data->d1 = std::move(d1);
    data->d2 = std::move(d2);
    data->quintic = true;
    return TabulatedProfile(std::move(data));
  }

  Jet eval(double t) const {
    const auto& d = *data_;
    const std::size_t n = d.x.size();
    if (t < d.x.front()) {
      if (t < d.x.front() - 1e-12 * std::max(1.0, std::abs(d.x.front())))
        throw DomainError("table profile evaluated below its first node");
      t = d.x.front();
    }
    if (t >= d.x.back()) {
      const double slope = d.d1.back();
      return {d.y.back() + slope * (t - d.x.back()), slope, 0.0, t == d.x.back()};
    }
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(d.x.begin(), d.x.end(), t) - d.x.begin()) - 1;
    const std::size_t j = std::min(i + 1, n - 1);
    const double h = d.x[j] - d.x[i];
    const double s = (t - d.x[i]) / h;
    double c[6] = {0, 0, 0, 0, 0, 0};
    // Written in dy so that the rounding of y0 and y1 does not reach the
    // higher coefficients (it would be amplified by 1/h^2 in the curvature).
    const double y0 = d.y[i], dy = d.y[j] - d.y[i], m0 = h * d.d1[i], m1 = h * d.d1[j];
    c[0] = y0;
    c[1] = m0;
    if (d.quintic) {
      const double k0 = h * h * d.d2[i], k1 = h * h * d.d2[j];
      c[2] = 0.5 * k0;
      c[3] = 10 * dy - 6 * m0 - 4 * m1 - 1.5 * k0 + 0.5 * k1;
      c[4] = -15 * dy + 8 * m0 + 7 * m1 + 1.5 * k0 - k1;
      c[5] = 6 * dy - 3 * m0 - 3 * m1 - 0.5 * k0 + 0.5 * k1;
    } else {
      c[2] = 3 * dy - 2 * m0 - m1;
      c[3] = -2 * dy + m0 + m1;
    }
    double p = c[5], dp = 0, ddp = 0;
    for (int k = 4; k >= 0; --k) {
      ddp = ddp * s + 2 * dp;
      dp = dp * s + p;
      p = p * s + c[k];
    }
    return {p, dp / h, ddp / (h * h), !d.quintic && s == 0};
  }

  double first_node() const { return data_->x.front(); }
  double last_node() const { return data_->x.back(); }
  std::size_t size() const { return data_->x.size(); }
  const std::vector<double>& nodes() const { return data_->x; }

 private:
  struct Data {
    std::vector<double> x, y, d1, d2;
    bool quintic = false;
  };

  explicit TabulatedProfile(std::shared_ptr<const Data> d) : data_(std::move(d)) {}

  static void check_nodes(const std::vector<double>& x, std::size_t ny) {
    if (x.size() < 2 || ny != x.size()) throw ConfigError("table needs at least two rows of equal length");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw ConfigError("table radii must be strictly increasing");
  }

  std::shared_ptr<const Data> data_;
};

struct ExpressionProfile {
  ProfileExpr expr;
  ParamSet params;
};

/// The radial metric. Immutable after construction.
struct RadialMetric {
  Gauge gauge = Gauge::Geodesic;
  std::variant<ExpressionProfile, TabulatedProfile> profile;
  double domain_start = 0;
  BoundaryKind boundary = BoundaryKind::None;
  std::string label;

  /// a(rho) in geodesic gauge, f(r) in areal gauge.
  Jet profile_at(double x) const {
    if (const auto* e = std::get_if<ExpressionProfile>(&profile)) {
      const EvalResult r = eval_d2(e->expr, x, e->params);
      return {r.value, r.first_derivative, r.second_derivative, r.nonsmooth};
    }
    return std::get<TabulatedProfile>(profile).eval(x);
  }

  /// Area of the centered sphere at radial coordinate x.
  double area_at(double x) const {
    if (gauge == Gauge::Geodesic) {
      const double a = profile_at(x).value;
      return 4 * kPi * a * a;
    }
    return 4 * kPi * x * x;
  }

  /// Areal radius sqrt(area/4pi) and its derivative along the coordinate.
  std::pair<double, double> areal_radius_at(double x) const {
    if (gauge == Gauge::Geodesic) {
      const Jet j = profile_at(x);
      return {j.value, j.d1};
    }
    return {x, 1.0};
  }
};

/// Flat R^3 in geodesic gauge, a(rho) = rho.
inline RadialMetric flat_metric() {
  return {Gauge::Geodesic, ExpressionProfile{parse("r"), {}}, 0.0, BoundaryKind::None, "flat"};
}

/// Spatial Schwarzschild exterior in areal gauge, f = 1 - 2m/r on [2m, inf).
inline RadialMetric schwarzschild_metric(double m) {
  if (!(m >= 0)) throw ConfigError("schwarzschild mass must be nonnegative");
  ParamSet p{{"m", m}};
  std::ostringstream label;
  label << "schwarzschild:m=" << m;
  return {Gauge::Areal, ExpressionProfile{parse("1 - 2*m/r", p), std::move(p)}, 2 * m,
          m > 0 ? BoundaryKind::Minimal : BoundaryKind::None, label.str()};
}

/// Round cylinder a(rho) = radius.
inline RadialMetric cylinder_metric(double radius) {
  if (!(radius > 0)) throw ConfigError("cylinder radius must be positive");
  ParamSet p{{"a", radius}};
  std::ostringstream label;
  label << "cylinder:a=" << radius;
  return {Gauge::Geodesic, ExpressionProfile{parse("a", p), std::move(p)}, 0.0, BoundaryKind::Minimal, label.str()};
}

namespace detail {

inline BoundaryKind detect_boundary(const RadialMetric& m) {
  const Jet j = m.profile_at(m.domain_start);
  const double scale = std::max(1.0, std::abs(m.domain_start));
  if (m.gauge == Gauge::Geodesic) {
    if (j.value > 0 && std::abs(j.d1) <= 1e-10) return BoundaryKind::Minimal;
    return BoundaryKind::None;
  }
  if (m.domain_start > 0 && std::abs(j.value) <= 1e-12 * scale) return BoundaryKind::Minimal;
  return BoundaryKind::None;
}

}  // namespace detail

/// Metric from a profile expression; the boundary kind is detected from the
/// profile at domain_start.
inline RadialMetric expression_metric(Gauge gauge, std::string_view text, ParamSet params, double domain_start = 0) {
  ProfileExpr e = parse(text, params);
  std::ostringstream label;
  label << "expr:" << to_string(gauge) << ":" << text;
  if (!params.empty()) {
    char sep = ':';
    for (const auto& [k, v] : params.values()) {
      label << sep << k << "=" << v;
      sep = ',';
    }
  }
  if (domain_start != 0) label << (params.empty() ? ":" : ",") << "start=" << domain_start;
  RadialMetric m{gauge, ExpressionProfile{std::move(e), std::move(params)}, domain_start, BoundaryKind::None,
                 label.str()};
  m.boundary = detail::detect_boundary(m);
  return m;
}

/// Metric from tabulated (radius, profile) rows, interpolated monotonically.
inline RadialMetric table_metric(Gauge gauge, std::vector<double> radius, std::vector<double> profile,
                                 std::string label = "table") {
  const double start = radius.empty() ? 0.0 : radius.front();
  RadialMetric m{gauge, TabulatedProfile::monotone_cubic(std::move(radius), std::move(profile)), start,
                 BoundaryKind::None, std::move(label)};
  m.boundary = detail::detect_boundary(m);
  return m;
}

/// Reads a two-column CSV (radius,profile); a non-numeric first row is a header.
inline RadialMetric table_metric_from_csv(Gauge gauge, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file '" + path + "'");
  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ';', ',');
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      std::size_t used = 0;
      const double x = std::stod(line.substr(0, comma), &used);
      const double y = std::stod(line.substr(comma + 1), &used);
      xs.push_back(x);
      ys.push_back(y);
    } catch (const std::exception&) {
      if (xs.empty() && lineno == 1) continue;
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return table_metric(gauge, std::move(xs), std::move(ys), "table:" + std::string(to_string(gauge)) + ":" + path);
}

struct SphereData {
  double rho = 0;
  double area = 0;
  double volume = 0;
  double mean_curvature = 0;
  double hawking_mass = 0;
  double willmore = 0;
  double scalar_curvature = 0;
  bool nonsmooth = false;
};

namespace detail {

/// The substituted lapse 2u / sqrt(f(r0 + u^2)) near a simple zero of f at r0.
/// Close to r0 the value of f is dominated by cancellation, so there it is
/// taken as d times the mean of f' over [r0, r0 + d] (5-point Gauss-Legendre),
/// which involves no subtraction.
class ThroatLapse {
 public:
  ThroatLapse(const RadialMetric& m, double r0, bool active = true)
      : m_(m), r0_(r0), near_below_(1e-2 * std::max(1.0, r0)) {
    if (active && !(m.profile_at(r0).d1 > 0)) throw DomainError("areal profile is not increasing at the throat");
  }

  /// f(r0 + d) without cancellation, for d up to near_limit().
  double f_near(double d) const {
    static constexpr double x[] = {0.0469100770306680, 0.2307653449471585, 0.5, 0.7692346550528415,
                                   0.9530899229693320};
    static constexpr double w[] = {0.1184634425280945, 0.2393143352496832, 0.2844444444444444,
                                   0.2393143352496832, 0.1184634425280945};
    double slope = 0;
    for (int k = 0; k < 5; ++k) slope += w[k] * m_.profile_at(r0_ + d * x[k]).d1;
    if (!(slope > 0)) throw DomainError("areal profile is not positive next to the throat");
    return d * slope;
  }
  double near_limit() const { return near_below_; }

  double operator()(double u) const {
    const double d = u * u;
    if (d <= near_below_) {
      if (d == 0) return 2 / std::sqrt(m_.profile_at(r0_).d1);
      return 2 * u / std::sqrt(f_near(d));
    }
    const double f = m_.profile_at(r0_ + d).value;
    if (!(f > 0)) throw DomainError("areal profile f must be positive inside the domain");
    return 2 * u / std::sqrt(f);
  }

 private:
  const RadialMetric& m_;
  double r0_, near_below_;
};

/// Integral of 4 pi x^2 * lapse over [lo, hi] in the metric's coordinate.
/// In areal gauge starting at a horizon the substitution s = lo + u^2 removes
/// the inverse square root singularity.
inline QuadResult volume_between(const RadialMetric& m, double lo, double hi, const ToleranceConfig& cfg) {
  if (hi <= lo) return {0.0, 0.0};
  if (m.gauge == Gauge::Geodesic) {
    return integrate(
        [&](double s) {
          const double a = m.profile_at(s).value;
          return 4 * kPi * a * a;
        },
        lo, hi, cfg);
  }
  const Jet at_lo = m.profile_at(lo);
  if (at_lo.value > 1e-8) {
    return integrate(
        [&](double s) {
          const double f = m.profile_at(s).value;
          if (!(f > 0)) throw DomainError("areal profile f must be positive inside the domain");
          return 4 * kPi * s * s / std::sqrt(f);
        },
        lo, hi, cfg);
  }
  const ThroatLapse lapse(m, lo);
  return integrate(
      [&](double u) {
        const double s = lo + u * u;
        return 4 * kPi * s * s * lapse(u);
      },
      0.0, std::sqrt(hi - lo), cfg);
}

inline void check_radius(const RadialMetric& m, double rho) {
  if (!(rho >= m.domain_start - 1e-14 * std::max(1.0, std::abs(m.domain_start))))
    throw DomainError("radius " + std::to_string(rho) + " lies below the domain start " +
                      std::to_string(m.domain_start));
}

}  // namespace detail

/// Volume enclosed by the sphere at rho, measured from domain_start.
inline double enclosed_volume(const RadialMetric& m, double rho, const ToleranceConfig& cfg = {}) {
  detail::check_radius(m, rho);
  return detail::volume_between(m, m.domain_start, std::max(rho, m.domain_start), cfg).value;
}

/// Local geometry of a sphere, without the enclosed volume.
inline SphereData sphere_local(const RadialMetric& m, double rho) {
  detail::check_radius(m, rho);
  rho = std::max(rho, m.domain_start);
  SphereData s;
  s.rho = rho;
  const Jet j = m.profile_at(rho);
  s.nonsmooth = j.nonsmooth;
  if (m.gauge == Gauge::Geodesic) {
    const double a = j.value, da = j.d1, dda = j.d2;
    if (!(a > 0)) throw DomainError("warping profile must be positive at rho = " + std::to_string(rho));
    s.area = 4 * kPi * a * a;
    s.mean_curvature = 2 * da / a;
    s.hawking_mass = 0.5 * a * (1 - da * da);
    s.scalar_curvature = 2 / (a * a) * (1 - da * da - 2 * a * dda);
    s.willmore = 16 * kPi * da * da;
  } else {
    const double r = rho, f = std::max(j.value, 0.0), df = j.d1;
    if (j.value < -1e-12) throw DomainError("areal profile f is negative at r = " + std::to_string(rho));
    if (!(r > 0)) throw DomainError("areal radius must be positive");
    s.area = 4 * kPi * r * r;
    s.mean_curvature = 2 * std::sqrt(f) / r;
    s.hawking_mass = 0.5 * r * (1 - f);
    s.scalar_curvature = 2 / (r * r) * (1 - f - r * df);
    s.willmore = 16 * kPi * f;
  }
  return s;
}

inline SphereData sphere_data(const RadialMetric& m, double rho, const ToleranceConfig& cfg = {}) {
  SphereData s = sphere_local(m, rho);
  s.volume = enclosed_volume(m, rho, cfg);
  return s;
}

/// Geometric probe grid from the domain start (or 1e-3 for a regular center
/// at 0) to cutoff_radius, probe_per_decade points per decade.
inline std::vector<double> probe_grid(const RadialMetric& m, const ToleranceConfig& cfg) {
  const double lo = m.domain_start > 0 ? m.domain_start : 1e-3;
  const double hi = std::max(cfg.cutoff_radius, 10 * lo);
  const auto n = static_cast<std::size_t>(std::ceil(cfg.probe_per_decade * std::log10(hi / lo))) + 1;
  return geometric_grid(lo, hi, std::max<std::size_t>(n, 8));
}

/// Converts an areal-gauge metric to geodesic gauge, rho(r) = int f^(-1/2) dr.
/// Nodes carry exact a, a' = sqrt(f), a'' = f'/2 and are joined by quintic
/// Hermite interpolation.
inline RadialMetric to_geodesic(const RadialMetric& m, const ToleranceConfig& cfg = {}) {
  if (m.gauge == Gauge::Geodesic) return m;
  const double r0 = m.domain_start;
  const Jet j0 = m.profile_at(r0);
  const double scale = std::max(1.0, r0);
  if (j0.value < -1e-12 * scale) throw DomainError("areal profile is negative at the domain start");
  const bool throat = r0 > 0 && j0.value <= 1e-12 * scale;
  if (throat && !(j0.d1 > 1e-12)) throw NonIntegrableThroat("f^(-1/2) is not integrable at the throat r = " +
                                                            std::to_string(r0));

  // Offsets from r0. At a throat a(rho) is smooth and even in rho, so the
  // nodes are spaced uniformly in u = sqrt(r - r0) (nearly uniform in rho) up
  // to u_zone; crowding them there only amplifies the rounding noise of f in
  // the interpolated a''. Past the zone, or without a throat, the grid is
  // geometric.
  const double hi = std::max(cfg.cutoff_radius, 10 * scale) - r0;
  const double ratio = std::pow(10.0, 1.0 / cfg.probe_per_decade);
  std::vector<double> offsets{0.0};
  double first = 1e-6 * scale;
  double u_zone = 0;
  if (throat) {
    u_zone = 0.1 * std::sqrt(scale);
    const double du = u_zone * (ratio - 1);
    const auto k = static_cast<std::size_t>(std::ceil(u_zone / du));
    for (std::size_t i = 1; i < k; ++i) offsets.push_back(std::pow(u_zone * i / k, 2));
    first = u_zone * u_zone;
  }
  const auto n = static_cast<std::size_t>(std::ceil(cfg.probe_per_decade * std::log10(hi / first))) + 1;
  for (double x : geometric_grid(first, hi, std::max<std::size_t>(n, 16))) offsets.push_back(x);

  std::vector<double> rho, a, da, dda;
  rho.reserve(offsets.size());
  double acc = 0;
  double prev_r = r0;
  const detail::ThroatLapse lapse = throat ? detail::ThroatLapse(m, r0) : detail::ThroatLapse(m, r0, false);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double r = r0 + offsets[i];
    if (i > 0) {
      if (throat && offsets[i] <= u_zone * u_zone * (1 + 1e-12)) {
        // r - r0 rather than the offset: a is stored as the rounded r.
        acc += integrate(lapse, std::sqrt(prev_r - r0), std::sqrt(r - r0), cfg).value;
      } else {
        acc += integrate([&](double s) { return 1 / std::sqrt(m.profile_at(s).value); }, prev_r, r, cfg).value;
      }
    }
    const Jet j = m.profile_at(r);
    const double f = throat && r - r0 <= lapse.near_limit() ? lapse.f_near(r - r0) : j.value;
    rho.push_back(acc);
    a.push_back(r);
    da.push_back(std::sqrt(std::max(f, 0.0)));
    dda.push_back(0.5 * j.d1);
    prev_r = r;
  }
  // Only a regular center (r0 = 0) or a throat has a'' = f'/2 exactly; keep it.
  RadialMetric out{Gauge::Geodesic, TabulatedProfile::quintic_hermite(std::move(rho), std::move(a), std::move(da),
                                                                    std::move(dda)),
                   0.0, m.boundary, m.label + "@geodesic"};
  return out;
}

/// Geodesic coordinate of the areal radius r for a metric produced by to_geodesic.
inline double geodesic_coordinate_of(const RadialMetric& geodesic, double areal_radius,
                                     const ToleranceConfig& cfg = {}) {
  const auto* table = std::get_if<TabulatedProfile>(&geodesic.profile);
  double hi = table ? table->last_node() : cfg.cutoff_radius;
  const auto g = [&](double s) { return geodesic.profile_at(s).value - areal_radius; };
  while (g(hi) < 0) hi *= 2;
  return find_root(g, geodesic.domain_start, hi, cfg);
}

namespace detail {

// Quantity whose sign is the sign of the mean curvature of centered spheres.
inline double mean_curvature_sign_function(const RadialMetric& m, double x) {
  const Jet j = m.profile_at(x);
  return m.gauge == Gauge::Geodesic ? j.d1 : j.value;
}

}  // namespace detail

/// Radii of minimal centered spheres (H = 0) on [domain_start, cutoff_radius].
inline std::vector<double> find_minimal_spheres(const RadialMetric& m, const ToleranceConfig& cfg = {}) {
  std::vector<double> roots;
  const auto push = [&](double x) {
    if (roots.empty() || std::abs(x - roots.back()) > 1e-9 * std::max(1.0, x)) roots.push_back(x);
  };
  const auto g = [&](double x) { return detail::mean_curvature_sign_function(m, x); };
  const double scale = std::max(1.0, m.domain_start);
  const Jet at_start = m.profile_at(m.domain_start);
  const bool has_boundary = m.gauge == Gauge::Geodesic ? at_start.value > 0 : m.domain_start > 0;
  if (has_boundary && std::abs(g(m.domain_start)) <= 1e-10 * (m.gauge == Gauge::Areal ? scale : 1.0))
    push(m.domain_start);

  std::vector<double> grid = probe_grid(m, cfg);
  if (grid.front() > m.domain_start && has_boundary) grid.insert(grid.begin(), m.domain_start);
  std::vector<double> val(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) val[i] = g(grid[i]);

  bool in_zero_run = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (val[i] == 0) {
      if (!in_zero_run) push(grid[i]);
      in_zero_run = true;
      continue;
    }
    in_zero_run = false;
    if (i + 1 < grid.size() && val[i + 1] != 0 && (val[i] > 0) != (val[i + 1] > 0))
      push(find_root(g, grid[i], grid[i + 1], cfg));
  }

  if (m.gauge == Gauge::Areal) {
    // f >= 0 touches zero without changing sign: look at local minima of f.
    const auto df = [&](double x) { return m.profile_at(x).d1; };
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double d0 = df(grid[i]), d1 = df(grid[i + 1]);
      if (d0 < 0 && d1 > 0) {
        const double x = find_root(df, grid[i], grid[i + 1], cfg);
        if (std::abs(m.profile_at(x).value) <= 1e-10) push(x);
      }
    }
    std::sort(roots.begin(), roots.end());
  }
  return roots;
}

struct HypothesisReport {
  bool scalar_curvature_nonneg = true;
  double worst_scalar_curvature = 0;  // most negative R found (0 if none)
  double worst_location = 0;
  bool no_interior_minimal = true;
  std::vector<double> interior_minimal_radii;
  bool minimal_boundary = true;
  /// Best kappa with area^3 >= kappa * volume^2 among centered spheres only.
  double radial_isoperimetric_constant = 0;
  std::vector<double> probe_grid;
  std::string kappa_note = "radial competitors only";
};

/// Grid certificate of the curvature, minimal-surface and isoperimetric hypotheses.
inline HypothesisReport check_hypotheses(const RadialMetric& m, const ToleranceConfig& cfg = {}) {
  HypothesisReport rep;
  rep.probe_grid = probe_grid(m, cfg);
  const auto& grid = rep.probe_grid;

  for (double x : grid) {
    const SphereData s = sphere_local(m, x);
    if (s.nonsmooth) continue;
    // R is compared against the curvature scale of the sphere itself.
    const double tol = 1e-9 * 4 * kPi / s.area;
    if (s.scalar_curvature < -tol && s.scalar_curvature < rep.worst_scalar_curvature) {
      rep.scalar_curvature_nonneg = false;
      rep.worst_scalar_curvature = s.scalar_curvature;
      rep.worst_location = x;
    }
  }

  const auto minimal = find_minimal_spheres(m, cfg);
  const double start_tol = 1e-9 * std::max(1.0, m.domain_start);
  for (double x : minimal)
    if (x > m.domain_start + start_tol) rep.interior_minimal_radii.push_back(x);
  rep.no_interior_minimal = rep.interior_minimal_radii.empty();

  const Jet at_start = m.profile_at(m.domain_start);
  const bool regular_center = m.gauge == Gauge::Geodesic ? at_start.value == 0 : m.domain_start == 0;
  rep.minimal_boundary = regular_center || (!minimal.empty() && minimal.front() <= m.domain_start + start_tol);

  double volume = detail::volume_between(m, m.domain_start, grid.front(), cfg).value;
  double prev = grid.front();
  double kappa = kInf;
  for (double x : grid) {
    volume += detail::volume_between(m, prev, x, cfg).value;
    prev = x;
    if (volume <= 0) continue;
    const double area = m.area_at(x);
    kappa = std::min(kappa, area * area * area / (volume * volume));
  }
  rep.radial_isoperimetric_constant = std::isfinite(kappa) ? kappa : 0.0;
  return rep;
}

struct MetricValidation {
  std::vector<std::string> errors;    // invariant violations that make the metric unusable
  std::vector<std::string> warnings;  // violations that only restrict which operations make sense
  bool large = true;                  // area grows beyond every bound on the probe grid

  bool ok() const { return errors.empty(); }
};

/// Checks the metric invariants on the probe grid.
inline MetricValidation validate_metric(const RadialMetric& m, const ToleranceConfig& cfg = {}) {
  MetricValidation v;
  std::vector<double> grid;
  try {
    grid = probe_grid(m, cfg);
  } catch (const Error& e) {
    v.errors.push_back(e.what());
    return v;
  }
  double max_area = 0;
  std::size_t bad = 0;
  for (double x : grid) {
    Jet j;
    try {
      j = m.profile_at(x);
    } catch (const Error& e) {
      v.errors.push_back("profile evaluation failed at " + std::to_string(x) + ": " + e.what());
      return v;
    }
    const bool positive = m.gauge == Gauge::Geodesic ? j.value > 0 : j.value >= -1e-12;
    if (!positive && bad++ == 0)
      v.errors.push_back(std::string(m.gauge == Gauge::Geodesic ? "warping a" : "areal f") +
                         " is not positive at radius " + std::to_string(x));
    max_area = std::max(max_area, m.area_at(x));
  }
  if (m.gauge == Gauge::Areal) {
    // Interior zeros of f make the areal chart degenerate.
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (m.profile_at(grid[i]).value <= 0 && grid[i] > m.domain_start) {
        v.errors.push_back("areal f vanishes inside the domain at r = " + std::to_string(grid[i]));
        break;
      }
  }
  if (m.boundary == BoundaryKind::Minimal) {
    const Jet j = m.profile_at(m.domain_start);
    const double residual = m.gauge == Gauge::Geodesic ? j.d1 : j.value;
    if (std::abs(residual) > 1e-8) v.errors.push_back("boundary declared minimal but H != 0 at the domain start");
  }
  const double last = m.area_at(grid.back());
  const double middle = m.area_at(grid[grid.size() / 2]);
  if (!(last >= max_area && last > 4 * middle)) {
    v.large = false;
    v.warnings.push_back("area profile is not asymptotically large on the probe grid (area at cutoff " +
                         std::to_string(last) + ")");
  }
  return v;
}

}  // namespace isomass
