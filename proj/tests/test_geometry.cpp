#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>

#include "isomass/isomass.hpp"

using namespace isomass;

namespace {

using LD = long double;
using Point = std::array<LD, 3>;
using Diagonal = std::function<Point(const Point&)>;  // diagonal metric components at (x, theta, phi)

// Scalar curvature of a diagonal 3-metric from finite-difference Christoffel
// symbols, R = g^ij R_ij with
// R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik.
class CurvatureOracle {
 public:
  explicit CurvatureOracle(Diagonal g, LD h = 1e-4L) : g_(std::move(g)), h_(h) {}

  LD scalar(const Point& x) const {
    using Gamma = std::array<std::array<std::array<LD, 3>, 3>, 3>;
    const Gamma G = christoffel(x);
    std::array<Gamma, 3> dG;  // dG[m][k][i][j] = d_m G^k_ij
    for (int m = 0; m < 3; ++m) {
      Point xp = x, xm = x;
      xp[m] += h_;
      xm[m] -= h_;
      const Gamma a = christoffel(xp), b = christoffel(xm);
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) dG[m][k][i][j] = (a[k][i][j] - b[k][i][j]) / (2 * h_);
    }
    const Point gd = g_(x);
    LD R = 0;
    for (int i = 0; i < 3; ++i) {
      const int j = i;  // diagonal inverse metric
      LD Rij = 0;
      for (int k = 0; k < 3; ++k) {
        Rij += dG[k][k][i][j] - dG[j][k][i][k];
        for (int l = 0; l < 3; ++l) Rij += G[k][k][l] * G[l][i][j] - G[k][j][l] * G[l][i][k];
      }
      R += Rij / gd[i];
    }
    return R;
  }

 private:
  std::array<std::array<std::array<LD, 3>, 3>, 3> christoffel(const Point& x) const {
    std::array<Point, 3> dg;  // dg[m][i] = d_m g_ii
    for (int m = 0; m < 3; ++m) {
      Point xp = x, xm = x;
      xp[m] += h_;
      xm[m] -= h_;
      const Point a = g_(xp), b = g_(xm);
      for (int i = 0; i < 3; ++i) dg[m][i] = (a[i] - b[i]) / (2 * h_);
    }
    const Point gd = g_(x);
    std::array<std::array<std::array<LD, 3>, 3>, 3> G{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          // G^k_ij = 1/2 g^kk (d_i g_jk + d_j g_ik - d_k g_ij)
          const LD t = (j == k ? dg[i][k] : 0) + (i == k ? dg[j][k] : 0) - (i == j ? dg[k][i] : 0);
          G[k][i][j] = t / (2 * gd[k]);
        }
    return G;
  }

  Diagonal g_;
  LD h_;
};

Diagonal geodesic_components(std::function<LD(LD)> a) {
  return [a](const Point& x) {
    const LD r2 = a(x[0]) * a(x[0]);
    const LD s = std::sin(x[1]);
    return Point{1, r2, r2 * s * s};
  };
}

Diagonal areal_components(std::function<LD(LD)> f) {
  return [f](const Point& x) {
    const LD s = std::sin(x[1]);
    return Point{1 / f(x[0]), x[0] * x[0], x[0] * x[0] * s * s};
  };
}

template <class F>
double simpson(F f, double a, double b, long n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (long i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

RadialMetric neck() { return expression_metric(Gauge::Geodesic, "r + 1.5*exp(-4*(r-3)^2)", {}, 0.0); }

}  // namespace

TEST(Sphere, FlatBall) {
  const SphereData s = sphere_data(flat_metric(), 2);
  EXPECT_NEAR(s.area, 16 * kPi, 1e-13);
  EXPECT_NEAR(s.mean_curvature, 1, 1e-15);
  EXPECT_NEAR(s.hawking_mass, 0, 1e-15);
  EXPECT_NEAR(s.scalar_curvature, 0, 1e-15);
  EXPECT_NEAR(s.volume, 32 * kPi / 3, 1e-12);
  EXPECT_NEAR(s.willmore, 16 * kPi, 1e-13);
}

TEST(Sphere, SchwarzschildHawkingMass) {
  const SphereData s = sphere_data(schwarzschild_metric(1), 10);
  EXPECT_NEAR(s.hawking_mass, 1, 1e-14);
  EXPECT_NEAR(s.scalar_curvature, 0, 1e-12);
  const CurvatureOracle oracle(areal_components([](LD r) { return 1 - 2 / r; }));
  EXPECT_NEAR(static_cast<double>(oracle.scalar({10, 1.0L, 0.3L})), 0.0, 1e-6);
}

TEST(Sphere, RoundCylinder) {
  const SphereData s = sphere_local(cylinder_metric(2), 5);
  EXPECT_EQ(s.mean_curvature, 0);
  EXPECT_NEAR(s.hawking_mass, 1, 1e-15);
  EXPECT_NEAR(s.scalar_curvature, 0.5, 1e-15);
  EXPECT_EQ(s.willmore, 0);
  const CurvatureOracle oracle(geodesic_components([](LD) { return 2.0L; }));
  EXPECT_NEAR(static_cast<double>(oracle.scalar({5, 1.0L, 0.3L})), 0.5, 1e-6);
}

TEST(Sphere, CurvatureMatchesChristoffelOracle) {
  struct Case {
    RadialMetric metric;
    Diagonal components;
    std::vector<double> radii;
  };
  std::vector<Case> cases;
  cases.push_back({neck(), geodesic_components([](LD r) { return r + 1.5L * std::exp(-4 * (r - 3) * (r - 3)); }),
                   {0.5, 2.5, 3.0, 3.4, 6.0}});
  cases.push_back({expression_metric(Gauge::Geodesic, "r*(1 - 0.5*exp(-r^2))", {}, 0.0),
                   geodesic_components([](LD r) { return r * (1 - 0.5L * std::exp(-r * r)); }), {0.3, 1.0, 1.7, 4.0}});
  cases.push_back({expression_metric(Gauge::Areal, "1 - 2*(1 + 0.5*(r - 2)^3/((r - 2)^3 + 27))/r", {}, 2.0),
                   areal_components([](LD r) {
                     const LD x = r - 2;
                     return 1 - 2 * (1 + 0.5L * x * x * x / (x * x * x + 27)) / r;
                   }),
                   {2.5, 4.0, 7.0, 20.0}});
  for (const auto& c : cases) {
    const CurvatureOracle oracle(c.components);
    for (double r : c.radii) {
      const double R = sphere_local(c.metric, r).scalar_curvature;
      const double expected = static_cast<double>(oracle.scalar({r, 1.1L, 0.2L}));
      EXPECT_NEAR(R, expected, 1e-6 * (1 + std::abs(expected))) << c.metric.label << " at " << r;
    }
  }
}

TEST(Sphere, RadiusBelowDomainThrows) { EXPECT_THROW(sphere_local(schwarzschild_metric(1), 1.5), DomainError); }

TEST(Volume, FlatBalls) {
  for (double r : {0.1, 1.0, 7.0, 300.0})
    EXPECT_NEAR(enclosed_volume(flat_metric(), r), 4 * kPi / 3 * r * r * r, 1e-12 * r * r * r);
}

TEST(Volume, SchwarzschildAgainstSimpson) {
  // 4 pi int_2^R s^2 (1 - 2/s)^(-1/2) ds with s = 2 + u^2.
  const auto g = [](double u) {
    const double s = 2 + u * u;
    return 8 * kPi * s * s * std::sqrt(s);
  };
  for (double R : {2.5, 10.0, 100.0}) {
    const double oracle = simpson(g, 0, std::sqrt(R - 2), 1000000);
    EXPECT_NEAR(enclosed_volume(schwarzschild_metric(1), R), oracle, 1e-9 * oracle);
  }
}

TEST(ToGeodesic, FlatIsIdentity) {
  const RadialMetric g = to_geodesic(expression_metric(Gauge::Areal, "1", {}, 0.0));
  for (double rho : {0.01, 0.5, 1.0, 10.0, 1000.0}) EXPECT_NEAR(g.profile_at(rho).value, rho, 1e-10 * rho);
}

TEST(ToGeodesic, SchwarzschildProperDistance) {
  const RadialMetric g = to_geodesic(schwarzschild_metric(1));
  // int_2^4 (1 - 2/s)^(-1/2) ds, s = 2 + u^2 gives 2 sqrt(2 + u^2) du.
  const double oracle = simpson([](double u) { return 2 * std::sqrt(2 + u * u); }, 0, std::sqrt(2.0), 1000000);
  EXPECT_NEAR(geodesic_coordinate_of(g, 4), oracle, 1e-8);
}

TEST(ToGeodesic, HawkingMassIsGaugeInvariant) {
  const RadialMetric areal = schwarzschild_metric(1);
  const RadialMetric g = to_geodesic(areal);
  EXPECT_NEAR(sphere_local(g, geodesic_coordinate_of(g, 6)).hawking_mass, 1, 1e-8);
  EXPECT_NEAR(sphere_local(areal, 6).hawking_mass, 1, 1e-14);
}

TEST(Property, GaugeInvarianceOnGeneratedMetrics) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 12; ++i) {
    const GeneratedMetric gen = nonneg_curvature_metric(0.2 + 1.8 * u(rng), 2 * u(rng), 3 + 10 * u(rng));
    const RadialMetric g = to_geodesic(gen.metric);
    for (double factor : {1.5, 3.0, 10.0, 100.0}) {
      const double r = factor * std::max(gen.metric.domain_start, 1.0);
      const SphereData a = sphere_local(gen.metric, r);
      const SphereData b = sphere_local(g, geodesic_coordinate_of(g, r));
      EXPECT_NEAR(b.area, a.area, 1e-9 * a.area);
      EXPECT_NEAR(b.hawking_mass, a.hawking_mass, 1e-8);
      EXPECT_NEAR(b.willmore, a.willmore, 1e-8);
      EXPECT_NEAR(b.scalar_curvature, a.scalar_curvature, 1e-6 / (r * r));
    }
  }
}

TEST(Property, ScalingCovariance) {
  // a_l(rho) = l a(rho/l) scales areas by l^2, H by 1/l, m_H by l, R by 1/l^2.
  const RadialMetric base = neck();
  for (double l : {0.3, 2.0, 17.0}) {
    const RadialMetric scaled =
        expression_metric(Gauge::Geodesic, "l*(r/l + 1.5*exp(-4*(r/l-3)^2))", {{"l", l}}, 0.0);
    for (double rho : {0.7, 2.9, 3.3, 8.0}) {
      const SphereData a = sphere_data(base, rho);
      const SphereData b = sphere_data(scaled, l * rho);
      EXPECT_NEAR(b.area, l * l * a.area, 1e-12 * b.area);
      EXPECT_NEAR(b.volume, l * l * l * a.volume, 1e-9 * b.volume);
      EXPECT_NEAR(b.mean_curvature, a.mean_curvature / l, 1e-12 * std::abs(a.mean_curvature / l) + 1e-15);
      EXPECT_NEAR(b.hawking_mass, l * a.hawking_mass, 1e-12 * l * (1 + std::abs(a.hawking_mass)));
      EXPECT_NEAR(b.scalar_curvature, a.scalar_curvature / (l * l), 1e-11 * (1 + std::abs(a.scalar_curvature)) / (l * l));
      EXPECT_NEAR(b.willmore, a.willmore, 1e-11 * (1 + a.willmore));
    }
  }
}

TEST(MinimalSpheres, FlatHasNone) { EXPECT_TRUE(find_minimal_spheres(flat_metric()).empty()); }

TEST(MinimalSpheres, SchwarzschildHorizon) {
  const auto r = find_minimal_spheres(schwarzschild_metric(1));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], 2);
}

TEST(MinimalSpheres, NeckAgainstGridScan) {
  const auto da = [](double r) { return 1 - 12 * (r - 3) * std::exp(-4 * (r - 3) * (r - 3)); };
  const int n = 1000000;
  const double lo = 1, hi = 6, h = (hi - lo) / n;
  std::vector<double> oracle;
  for (int i = 0; i < n; ++i)
    if ((da(lo + i * h) > 0) != (da(lo + (i + 1) * h) > 0)) oracle.push_back(lo + (i + 0.5) * h);
  ASSERT_EQ(oracle.size(), 2u);
  const auto found = find_minimal_spheres(neck());
  ASSERT_EQ(found.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(found[i], oracle[i], h);
  EXPECT_NEAR(found[0], 3.05, 0.05);
  EXPECT_NEAR(found[1], 3.7, 0.1);
}

TEST(Hypotheses, FlatSpace) {
  const HypothesisReport h = check_hypotheses(flat_metric());
  EXPECT_TRUE(h.scalar_curvature_nonneg);
  EXPECT_TRUE(h.no_interior_minimal);
  EXPECT_TRUE(h.minimal_boundary);
  EXPECT_NEAR(h.radial_isoperimetric_constant, 36 * kPi, 1e-6);
}

TEST(Hypotheses, Schwarzschild) {
  const HypothesisReport h = check_hypotheses(schwarzschild_metric(1));
  EXPECT_TRUE(h.scalar_curvature_nonneg);
  EXPECT_TRUE(h.no_interior_minimal);
  EXPECT_TRUE(h.minimal_boundary);
  EXPECT_GT(h.radial_isoperimetric_constant, 0);
}

TEST(Hypotheses, NegativeCurvatureIsFlagged) {
  const RadialMetric m = expression_metric(Gauge::Geodesic, "r*(1 - 0.5*exp(-r^2))", {}, 0.0);
  const HypothesisReport h = check_hypotheses(m);
  // Direct formula R = (2/a^2)(1 - a'^2 - 2 a a'') with hand derivatives.
  double worst = 0, where = 0;
  for (double r : h.probe_grid) {
    const double e = std::exp(-r * r);
    const double a = r - 0.5 * r * e;
    const double da = 1 - 0.5 * e + r * r * e;
    const double dda = (3 * r - 2 * r * r * r) * e;
    const double R = 2 / (a * a) * (1 - da * da - 2 * a * dda);
    if (R < -1e-9 / (a * a) && R < worst) worst = R, where = r;
  }
  ASSERT_LT(worst, 0);
  EXPECT_FALSE(h.scalar_curvature_nonneg);
  EXPECT_NEAR(h.worst_scalar_curvature, worst, 1e-9 * std::abs(worst));
  EXPECT_EQ(h.worst_location, where);
}

TEST(Hypotheses, NeckHasInteriorMinimalSpheres) {
  const HypothesisReport h = check_hypotheses(neck());
  EXPECT_FALSE(h.no_interior_minimal);
  EXPECT_EQ(h.interior_minimal_radii.size(), 2u);
}

TEST(Validation, CylinderIsNotLarge) {
  const MetricValidation v = validate_metric(cylinder_metric(2));
  EXPECT_TRUE(v.ok());
  EXPECT_FALSE(v.large);
  EXPECT_EQ(v.warnings.size(), 1u);
}

TEST(Validation, NonPositiveWarpingIsAnError) {
  EXPECT_FALSE(validate_metric(expression_metric(Gauge::Geodesic, "r - 5", {}, 0.0)).ok());
  EXPECT_FALSE(validate_metric(expression_metric(Gauge::Areal, "(r - 3)^2 - 0.5", {}, 0.0)).ok());
}

TEST(Validation, StandardMetricsAreClean) {
  for (const auto& m : {flat_metric(), schwarzschild_metric(1), neck()}) {
    const MetricValidation v = validate_metric(m);
    EXPECT_TRUE(v.ok()) << m.label;
    EXPECT_TRUE(v.large) << m.label;
  }
}

TEST(Table, CsvRoundTripAndMonotoneInterpolation) {
  const std::string path = ::testing::TempDir() + "isomass_table.csv";
  {
    std::ofstream out(path);
    out << "rho,a\n";
    for (int i = 0; i <= 40; ++i) {
      const double r = 0.25 * i;
      out << r << "," << (r < 2 ? r : 2 + 0.5 * (r - 2)) << "\n";
    }
  }
  const RadialMetric m = table_metric_from_csv(Gauge::Geodesic, path);
  std::remove(path.c_str());
  EXPECT_EQ(m.domain_start, 0);
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double r = 0.01 * i;
    const double a = m.profile_at(r).value;
    EXPECT_GE(a, prev);
    prev = a;
  }
  EXPECT_NEAR(m.profile_at(1.0).value, 1.0, 1e-14);
  EXPECT_NEAR(m.profile_at(6.0).value, 4.0, 1e-14);
}

TEST(Table, MalformedRowsAreRejected) {
  const std::string path = ::testing::TempDir() + "isomass_bad_table.csv";
  {
    std::ofstream out(path);
    out << "0,0\n1,x\n";
  }
  EXPECT_THROW(table_metric_from_csv(Gauge::Geodesic, path), ConfigError);
  std::remove(path.c_str());
  EXPECT_THROW(table_metric_from_csv(Gauge::Geodesic, path), ConfigError);
}
