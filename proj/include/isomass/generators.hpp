#pragma once

// Random metrics with nonnegative scalar curvature.
//
// Areal gauge with f = 1 - 2 mu(r)/r and a nondecreasing mass function
//   mu(r) = m0 + m1 x^3 / (x^3 + c^3),  x = r - 2 m0,
// on [2 m0, inf). Then m_H(r) = mu(r) and R = 4 mu'(r) / r^2 >= 0. The
// horizon at 2 m0 is minimal, and f > 0 beyond it as long as
// c^3 > (32/27) m1^3.

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "isomass/geometry.hpp"

namespace isomass {

struct GeneratedMetric {
  RadialMetric metric;
  double m0 = 0;
  double m1 = 0;
  double c = 0;
  double mass_at_infinity = 0;
};

/// Areal-gauge metric with the mass function above.
inline GeneratedMetric nonneg_curvature_metric(double m0, double m1, double c) {
  if (!(m0 >= 0) || !(m1 >= 0) || !(c > 0)) throw ConfigError("mass profile parameters must be nonnegative");
  if (!(c * c * c > 32.0 / 27.0 * m1 * m1 * m1)) throw ConfigError("mass profile would create a second horizon");
  GeneratedMetric g;
  g.m0 = m0;
  g.m1 = m1;
  g.c = c;
  g.mass_at_infinity = m0 + m1;
  if (m0 == 0) {
    g.metric = expression_metric(Gauge::Areal, "1 - 2*m1*r^2/(r^3 + c^3)", {{"m1", m1}, {"c", c}}, 0.0);
  } else {
    g.metric = expression_metric(Gauge::Areal, "1 - 2*(m0 + m1*(r - 2*m0)^3/((r - 2*m0)^3 + c^3))/r",
                                 {{"m0", m0}, {"m1", m1}, {"c", c}}, 2 * m0);
  }
  return g;
}

/// Draws m0 in [0.2, 2] (or 0 with probability 1/8), m1 in [0, 2], c in [1.5 m1, 1.5 m1 + 10].
/// Every other draw is converted to geodesic gauge.
inline GeneratedMetric random_nonneg_curvature_metric(std::mt19937_64& rng, const ToleranceConfig& cfg = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool center = unit(rng) < 0.125;
  const double m0 = center ? 0.0 : 0.2 + 1.8 * unit(rng);
  const double m1 = 2 * unit(rng);
  const double c = std::max(1.5 * m1, 0.1) + 10 * unit(rng);
  GeneratedMetric g = nonneg_curvature_metric(m0, m1, c);
  if (unit(rng) < 0.5) g.metric = to_geodesic(g.metric, cfg);
  return g;
}

}  // namespace isomass
