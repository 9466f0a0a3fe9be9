#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isomass/isomass.hpp"

using namespace isomass;

namespace {

RadialMetric neck() { return expression_metric(Gauge::Geodesic, "r + 1.5*exp(-4*(r-3)^2)", {}, 0.0); }

}  // namespace

TEST(PCapacity, FlatSphere) { EXPECT_NEAR(p_capacity(flat_metric(), 2, 1.5).ncap, std::pow(2.0, 1.5), 1e-12); }

TEST(PCapacity, FlatUnitSphere) {
  for (double p : {1.2, 2.0, 2.8}) EXPECT_NEAR(p_capacity(flat_metric(), 1, p).ncap, 1, 1e-12) << p;
}

TEST(PCapacity, SchwarzschildHorizon) {
  // I_2 = int_2^inf dr / (4 pi r^2 sqrt(1 - 2/r)) = 1/(4 pi m), so flux = 4 pi m and ncap = m.
  for (double m : {0.5, 1.0, 3.0}) {
    const CapacityResult c = p_capacity(schwarzschild_metric(m), 2 * m, 2);
    EXPECT_NEAR(c.ncap, m, 1e-8 * m);
    EXPECT_NEAR(c.flux, 4 * kPi * m, 1e-8 * m);
    EXPECT_FALSE(c.parabolic);
  }
}

TEST(PCapacity, SchwarzschildOutsideHorizonClosedForm) {
  // For p = 2: I_2(r0) = (1/(4 pi m)) (1 - sqrt(1 - 2m/r0)).
  for (double r0 : {2.5, 3.0, 10.0, 1000.0}) {
    const double I = (1 - std::sqrt(1 - 2 / r0)) / (4 * kPi);
    EXPECT_NEAR(p_capacity(schwarzschild_metric(1), r0, 2).ncap, 1 / (4 * kPi * I), 1e-9 / (4 * kPi * I));
  }
}

TEST(PCapacity, CylinderIsParabolic) {
  for (double p : {1.5, 2.0, 2.5}) {
    const CapacityResult c = p_capacity(cylinder_metric(2), 1, p);
    EXPECT_TRUE(c.parabolic);
    EXPECT_EQ(c.ncap, 0);
  }
}

TEST(PCapacity, ExponentRange) {
  EXPECT_THROW(p_capacity(flat_metric(), 1, 3.0), BadExponent);
  EXPECT_THROW(p_capacity(flat_metric(), 1, 1.0), BadExponent);
  EXPECT_THROW(p_capacity(flat_metric(), 1, 0.5), BadExponent);
  EXPECT_THROW(p_capacity(flat_metric(), 1, NAN), BadExponent);
  EXPECT_NO_THROW(p_capacity(flat_metric(), 1, kMinExponent));
  EXPECT_NO_THROW(p_capacity(flat_metric(), 1, kMaxExponent));
}

TEST(PCapacity, PointHasNoCapacity) { EXPECT_EQ(p_capacity(flat_metric(), 0, 2).ncap, 0); }

TEST(OneCapacity, FlatSphere) { EXPECT_NEAR(one_capacity(flat_metric(), 3).ncap, 9, 1e-12); }

TEST(OneCapacity, SchwarzschildHorizon) { EXPECT_NEAR(one_capacity(schwarzschild_metric(1), 2).ncap, 4, 1e-12); }

TEST(OneCapacity, NeckAgainstGridScan) {
  const auto a = [](double r) { return r + 1.5 * std::exp(-4 * (r - 3) * (r - 3)); };
  const int n = 1000000;
  const double lo = 3, hi = 10, h = (hi - lo) / n;
  double best = INFINITY;
  for (int i = 0; i <= n; ++i) best = std::min(best, a(lo + i * h));
  const CapacityResult c = one_capacity(neck(), 3);
  EXPECT_NEAR(c.ncap, best * best, 1e-9 * best * best);
  EXPECT_LT(c.ncap, a(3) * a(3));
  EXPECT_GT(c.hull_radius, 3.5);
}

TEST(Capacity, DispatchesOnExponent) {
  EXPECT_EQ(capacity(flat_metric(), 2, 1).p, 1);
  EXPECT_NEAR(capacity(flat_metric(), 2, 1).ncap, 4, 1e-12);
  EXPECT_NEAR(capacity(flat_metric(), 2, 2).ncap, 2, 1e-12);
}

TEST(Potential, FlatHarmonic) {
  const PotentialCurve c = capacitary_potential(flat_metric(), 1, 2);
  ASSERT_EQ(c.samples.size(), 200u);
  for (const auto& s : c.samples) EXPECT_NEAR(s.u, 1 / s.rho, 1e-9);
}

TEST(Potential, FlatPOneAndAHalf) {
  const PotentialCurve c = capacitary_potential(flat_metric(), 1, 1.5);
  for (const auto& s : c.samples) {
    EXPECT_NEAR(s.u, std::pow(s.rho, -3), 1e-9);
    if (s.u > 0) {
      EXPECT_NEAR(s.w, -(1.5 - 1) * std::log(s.u), 1e-12 * (1 + s.w));
    }
  }
}

TEST(Potential, SchwarzschildHarmonicResidual) {
  const RadialMetric m = schwarzschild_metric(1);
  const PotentialCurve c = capacitary_potential(m, 2, 2, 200001);
  EXPECT_EQ(c.samples.front().u, 1);
  for (const auto& s : c.samples)
    if (s.rho >= 1e6) {
      EXPECT_LT(s.u, 1e-5);
      break;
    }
  // Radial equation for p = 2: 4 pi r^2 sqrt(f) |u_r| equals the flux.
  double worst = 0;
  for (std::size_t i = 1; i + 1 < c.samples.size(); ++i) {
    const double r = c.samples[i].rho;
    if (r < 2.5 || r > 1e4) continue;
    const double r0 = c.samples[i - 1].rho, r2 = c.samples[i + 1].rho;
    const double h0 = r - r0, h1 = r2 - r;
    const double du = -c.samples[i - 1].u * h1 / (h0 * (h0 + h1)) + c.samples[i].u * (h1 - h0) / (h0 * h1) +
                      c.samples[i + 1].u * h0 / (h1 * (h0 + h1));
    const double Q = 4 * kPi * r * r * std::sqrt(1 - 2 / r) * std::abs(du);
    worst = std::max(worst, std::abs(Q / c.flux - 1));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Potential, ParabolicThrows) { EXPECT_THROW(capacitary_potential(cylinder_metric(2), 1, 2), ParabolicMetric); }

TEST(Holder, FlatEquality) {
  const HolderReport h = verify_flux_holder(flat_metric(), 1, 2, 50);
  EXPECT_TRUE(h.pass);
  EXPECT_LE(h.max_relative_gap, 1e-8);
  EXPECT_EQ(h.samples.size(), 50u);
}

TEST(Holder, SchwarzschildSamplesPass) {
  for (const auto& [rho0, p] : std::vector<std::pair<double, double>>{{2, 2}, {3, 1.5}}) {
    const HolderReport h = verify_flux_holder(schwarzschild_metric(1), rho0, p, 50);
    EXPECT_TRUE(h.pass);
    for (const auto& s : h.samples) EXPECT_TRUE(s.pass);
  }
}

TEST(Property, ScalingOfCapacity) {
  // a_l(rho) = l a(rho/l): ncap_p scales by l^(3-p).
  for (double l : {0.25, 3.0}) {
    const RadialMetric scaled =
        expression_metric(Gauge::Geodesic, "l*(r/l + 1.5*exp(-4*(r/l-3)^2))", {{"l", l}}, 0.0);
    for (double p : {1.3, 2.0, 2.7}) {
      const double base = p_capacity(neck(), 2, p).ncap;
      EXPECT_NEAR(p_capacity(scaled, 2 * l, p).ncap, std::pow(l, 3 - p) * base, 1e-9 * std::pow(l, 3 - p) * base);
    }
    EXPECT_NEAR(one_capacity(scaled, 3 * l).ncap, l * l * one_capacity(neck(), 3).ncap, 1e-9 * l * l);
  }
}

TEST(Property, MonotoneInTheInnerSphere) {
  for (const auto& m : {flat_metric(), schwarzschild_metric(1), neck()})
    for (double p : {1.5, 2.0, 2.5}) {
      double prev = 0;
      for (double r : {2.0, 2.5, 3.0, 4.0, 8.0, 30.0}) {
        const double c = p_capacity(m, r, p).ncap;
        EXPECT_GE(c, prev) << m.label << " p=" << p << " r=" << r;
        prev = c;
      }
    }
}

TEST(Property, GaugeInvariance) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 6; ++i) {
    GeneratedMetric g = random_nonneg_curvature_metric(rng);
    if (g.metric.gauge == Gauge::Geodesic) continue;
    const RadialMetric geo = to_geodesic(g.metric);
    const double r = 2 * std::max(1.0, g.metric.domain_start);
    for (double p : {1.5, 2.0, 2.5}) {
      const double a = p_capacity(g.metric, r, p).ncap;
      const double b = p_capacity(geo, geodesic_coordinate_of(geo, r), p).ncap;
      EXPECT_NEAR(a, b, 1e-8 * a);
    }
  }
}

TEST(Property, CapacityTendsToHullAreaAsPToOne) {
  for (const auto& [m, rho0] : std::vector<std::pair<RadialMetric, double>>{
           {flat_metric(), 2.0}, {schwarzschild_metric(1), 2.0}, {schwarzschild_metric(1), 3.0}, {neck(), 3.0}}) {
    const double n1 = one_capacity(m, rho0).ncap;
    double prev = INFINITY;
    for (double p : {1.5, 1.25, 1.1, 1.05, 1.01, 1.001}) {
      const double gap = std::abs(p_capacity(m, rho0, p).ncap - n1);
      EXPECT_LT(gap, prev) << m.label << " p=" << p;
      prev = gap;
    }
    EXPECT_LT(prev, 2e-2 * n1);
  }
}
