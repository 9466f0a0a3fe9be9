#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "isomass/isomass.hpp"

using namespace isomass;

namespace {

RadialMetric neck() { return expression_metric(Gauge::Geodesic, "r + 1.5*exp(-4*(r-3)^2)", {}, 0.0); }

std::vector<double> doubling(double from, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(from * std::pow(2.0, k));
  return g;
}

const std::vector<double> kPGrid{1, 1.25, 1.5, 2, 2.5, 2.9};

}  // namespace

TEST(Quasilocal, FlatIsZero) {
  for (double rho : {0.5, 1.0, 7.0, 300.0}) {
    for (double p : {1.0, 1.5, 2.0, 2.7}) {
      const MassValue v = quasilocal_mass(flat_metric(), rho, p);
      EXPECT_FALSE(v.infinite);
      EXPECT_NEAR(v.value, 0, 1e-9) << rho << " " << p;
    }
    EXPECT_NEAR(huisken_mass(flat_metric(), rho), 0, 1e-9 * std::max(1.0, rho));
  }
}

TEST(Quasilocal, HuiskenFlatUnitBall) { EXPECT_NEAR(huisken_mass(flat_metric(), 1), 0, 1e-15); }

TEST(Quasilocal, SchwarzschildAtHundred) {
  const RadialMetric s = schwarzschild_metric(1);
  const double v = quasilocal_mass(s, 100, 2).value;
  EXPECT_GT(v, 0.9);
  EXPECT_LT(v, 1.1);
  EXPECT_LT(std::abs(huisken_mass(s, 100) - 1), 0.05);
}

TEST(Quasilocal, HuiskenBelowHullMassInTheNeck) {
  for (double rho : {3.0, 3.3, 3.6, 4.0}) {
    const double h = huisken_mass(neck(), rho);
    const double q = quasilocal_mass(neck(), rho, 1).value;
    EXPECT_LE(h, q + 1e-9) << rho;
  }
}

TEST(Quasilocal, POneEqualsHuiskenOnHullStableSpheres) {
  for (double rho : {2.5, 5.0, 40.0})
    EXPECT_NEAR(quasilocal_mass(schwarzschild_metric(1), rho, 1).value, huisken_mass(schwarzschild_metric(1), rho),
                1e-12);
}

TEST(Quasilocal, CylinderIsInfinite) {
  const MassValue v = quasilocal_mass(cylinder_metric(2), 5, 2);
  EXPECT_TRUE(v.infinite);
  EXPECT_EQ(v.value, kMassSentinel);
}

TEST(Quasilocal, Scaling) {
  // a_l(rho) = l a(rho/l) scales every quasilocal mass by l.
  for (double l : {0.5, 2.0}) {
    const RadialMetric scaled =
        expression_metric(Gauge::Geodesic, "l*(r/l + 1.5*exp(-4*(r/l-3)^2))", {{"l", l}}, 0.0);
    for (double p : {1.0, 1.5, 2.0, 2.5}) {
      const double base = quasilocal_mass(neck(), 5, p).value;
      EXPECT_NEAR(quasilocal_mass(scaled, 5 * l, p).value, l * base, 1e-8 * l * (1 + std::abs(base))) << l << " " << p;
    }
  }
}

TEST(TotalMass, FlatConverges) {
  const MassReport r = total_mass(flat_metric(), 1.5, doubling(50, 6));
  EXPECT_NEAR(r.extrapolated_mass, 0, 1e-6);
  EXPECT_EQ(r.verdict, Verdict::Converged);
  EXPECT_EQ(r.radii.size(), r.quasilocal.size());
  EXPECT_FALSE(r.note.empty());
}

TEST(TotalMass, SchwarzschildConverges) {
  const RadialMetric s = schwarzschild_metric(1);
  const std::vector<double> grid = default_r_grid(s);
  for (double p : {1.0, 1.5, 2.0, 2.5}) {
    const MassReport r = total_mass(s, p, grid);
    EXPECT_NEAR(r.extrapolated_mass, 1, 1e-3) << p;
    EXPECT_EQ(r.verdict, Verdict::Converged) << p;
    EXPECT_LE(r.err_estimate, 1e-3);
  }
  const MassReport h = huisken_total_mass(s, grid);
  EXPECT_NEAR(h.extrapolated_mass, 1, 1e-3);
  EXPECT_EQ(h.kind, "huisken");
}

TEST(TotalMass, CylinderDiverges) {
  const MassReport r = total_mass(cylinder_metric(2), 2, doubling(50, 6));
  EXPECT_TRUE(r.infinite);
  EXPECT_EQ(r.verdict, Verdict::Divergent);
  EXPECT_EQ(r.extrapolated_mass, kMassSentinel);
}

TEST(TotalMass, GridChecks) {
  EXPECT_THROW(total_mass(flat_metric(), 2, {10, 20, 40}), ConfigError);
  EXPECT_THROW(total_mass(flat_metric(), 2, {10, 20, 40, 30, 50, 60}), ConfigError);
}

TEST(TotalMass, DefaultGrid) {
  const ToleranceConfig cfg;
  const std::vector<double> g = default_r_grid(schwarzschild_metric(1), cfg);
  ASSERT_EQ(g.size(), static_cast<std::size_t>(cfg.extrap_terms));
  // The horizon has p = 2 capacity radius m = 1.
  EXPECT_NEAR(g.front(), 50, 1e-6);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], 2, 1e-12);
}

TEST(Equivalence, Schwarzschild) {
  const RadialMetric s = schwarzschild_metric(1);
  const EquivalenceVerdict v = equivalence_report(s, kPGrid, default_r_grid(s), 5e-3);
  EXPECT_TRUE(v.pass);
  EXPECT_LE(v.max_pairwise_gap, v.tolerance);
  ASSERT_EQ(v.masses.size(), kPGrid.size() + 1);
  for (const auto& r : v.masses) EXPECT_NEAR(r.extrapolated_mass, 1, 5e-3);
}

TEST(Equivalence, Flat) {
  const EquivalenceVerdict v = equivalence_report(flat_metric(), kPGrid, doubling(50, 6), 1e-6);
  EXPECT_TRUE(v.pass);
  for (const auto& r : v.masses) EXPECT_NEAR(r.extrapolated_mass, 0, 1e-6);
}

TEST(Equivalence, GeneratedBump) {
  const GeneratedMetric g = nonneg_curvature_metric(0.8, 0.6, 3);
  const EquivalenceVerdict v = equivalence_report(g.metric, kPGrid, default_r_grid(g.metric), 1e-2);
  EXPECT_TRUE(v.pass);
  for (const auto& r : v.masses) EXPECT_NEAR(r.extrapolated_mass, g.mass_at_infinity, 1e-2) << r.p;
}

TEST(Equivalence, CylinderFails) {
  const EquivalenceVerdict v = equivalence_report(cylinder_metric(2), {1.5, 2}, doubling(50, 6), 1e-2);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.max_pairwise_gap, kMassSentinel);
}

TEST(Equivalence, RejectsExponentOutsideRange) {
  EXPECT_THROW(equivalence_report(flat_metric(), {2.9995}, doubling(50, 6), 1e-2), BadExponent);
}

TEST(Bmx, SchwarzschildHorizonEquality) {
  const BmxReport r = bmx_bound_check(schwarzschild_metric(1), 2, 2);
  EXPECT_NEAR(r.lhs, 1, 1e-6);
  EXPECT_NEAR(r.rhs, 1, 1e-6);
  EXPECT_TRUE(r.pass);
}

TEST(Bmx, FlatEquality) {
  const BmxReport r = bmx_bound_check(flat_metric(), 1, 2);
  EXPECT_NEAR(r.lhs, 1, 1e-9);
  EXPECT_NEAR(r.rhs, 1, 1e-9);
  EXPECT_NEAR(r.slack, 0, 1e-9);
}

TEST(Bmx, SchwarzschildSpheresAreEqualityCases) {
  // Coordinate spheres of Schwarzschild attain the bound.
  for (double rho : {3.0, 5.0, 10.0})
    for (double p : {1.5, 2.0, 2.5}) {
      const BmxReport r = bmx_bound_check(schwarzschild_metric(1), rho, p);
      EXPECT_TRUE(r.pass) << rho << " " << p;
      EXPECT_NEAR(r.lhs, r.rhs, 1e-9 * r.rhs) << rho << " " << p;
    }
}

TEST(Bmx, StrictOnGeneratedMetric) {
  const GeneratedMetric g = nonneg_curvature_metric(0.8, 0.6, 3);
  for (double r : {2.0, 3.0, 5.0, 10.0})
    for (double p : {1.5, 2.0, 2.5}) {
      const BmxReport b = bmx_bound_check(g.metric, r, p);
      EXPECT_TRUE(b.pass) << r << " " << p;
      EXPECT_GT(b.slack, 1e-6 * b.rhs) << r << " " << p;
    }
}

TEST(Bmx, NeedsNonnegativeCurvature) {
  // The neck has R < 0 in its exterior and the bound fails there.
  EXPECT_FALSE(check_hypotheses(neck()).scalar_curvature_nonneg);
  EXPECT_FALSE(bmx_bound_check(neck(), 2, 2).pass);
}

TEST(Isoperimetric, SchwarzschildThreshold) {
  const std::vector<double> grid = geometric_grid(10, 2000, 40);
  const IsoperimetricReport above = asymptotic_isoperimetric_check(schwarzschild_metric(1), 1.1, grid);
  ASSERT_TRUE(above.threshold.has_value());
  EXPECT_LT(*above.threshold, 2000);
  EXPECT_TRUE(above.rows.back().pass);

  const IsoperimetricReport below = asymptotic_isoperimetric_check(schwarzschild_metric(1), 0.9, grid);
  for (const auto& row : below.rows) {
    if (row.radius < 100) continue;
    EXPECT_FALSE(row.pass) << row.radius;
  }
  EXPECT_FALSE(below.threshold.has_value());
}

TEST(Isoperimetric, FlatAllPass) {
  const IsoperimetricReport r = asymptotic_isoperimetric_check(flat_metric(), 0.1, geometric_grid(0.5, 500, 30));
  for (const auto& row : r.rows) EXPECT_TRUE(row.pass);
  ASSERT_TRUE(r.threshold.has_value());
  EXPECT_EQ(*r.threshold, 0.5);
}

TEST(Export, JsonFields) {
  const MassReport r = total_mass(flat_metric(), 2, doubling(50, 6));
  std::ostringstream out;
  write_mass_json(out, r, "flat");
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j.at("metric"), "flat");
  EXPECT_EQ(j.at("p"), 2.0);
  EXPECT_EQ(j.at("radii").get<std::vector<double>>(), r.radii);
  EXPECT_EQ(j.at("quasilocal").get<std::vector<double>>(), r.quasilocal);
  EXPECT_EQ(j.at("extrapolated").get<double>(), r.extrapolated_mass);
  EXPECT_EQ(j.at("err").get<double>(), r.err_estimate);
  EXPECT_EQ(j.at("verdict"), "CONVERGED");
  EXPECT_EQ(j.size(), 7u);
}

TEST(Export, CsvRowsAndQuoting) {
  const MassReport r = total_mass(flat_metric(), 2, doubling(50, 6));
  std::ostringstream out;
  write_mass_csv_header(out);
  write_mass_csv_rows(out, r, "expr:areal:a,b");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "metric,p,radius,quasilocal,extrapolated,err,verdict");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind("\"expr:areal:a,b\",2,", 0), 0u) << line;
    EXPECT_NE(line.find("CONVERGED"), std::string::npos);
  }
  EXPECT_EQ(rows, 6);
}
