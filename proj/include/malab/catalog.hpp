#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"
#include "grid_function.hpp"
#include "polygon.hpp"
#include "subdifferential.hpp"

namespace malab {

// Closed-form solutions used as oracles. Sampled exactly on the grid, with
// the exact gradient and Hessian fields attached (not the fitted ones).
struct CatalogEntry {
  PLConvexFunction u;
  double fConst = 1.0;  // det D^2 u of the smooth solution
  Mat2 exactHessian;    // constant for every catalog entry
};

// disc polygonized so the chord sagitta stays below h^2/8, i.e. at the same
// order as the solver's own discretization error
inline Body2 discDomain(double radius, double h) {
  int m = static_cast<int>(std::ceil(2.0 * pi() / std::sqrt(h * h / (2.0 * radius * radius))));
  m = std::max(m, 64);
  return bodyFromPolygon(discPolygon(vec2(0, 0), radius, m));
}

inline Body2 ellipseDomain(double a, double b, double h) {
  const double r = std::max(a, b);
  int m = static_cast<int>(std::ceil(2.0 * pi() / std::sqrt(h * h / (2.0 * r * r))));
  m = std::max(m, 64);
  Polygon p;
  p.reserve(m);
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * pi() * i / m;
    p.push_back(vec2(a * std::cos(t), b * std::sin(t)));
  }
  return bodyFromPolygon(p);
}

// name: quadratic_disc | scaled_quadratic | anisotropic_quadratic
//   quadratic_disc             u = (|x|^2 - 1)/2 on B(0,1),  f = 1
//   scaled_quadratic(c)        u = c (|x|^2 - 1)/2,          f = c^2
//   anisotropic_quadratic(a)   u = (a x1^2 + x2^2/a - 1)/2 on its zero
//                              sublevel ellipse,             f = 1
inline CatalogEntry analyticCatalog(const std::string& name, double h, double param = 2.0) {
  CatalogEntry e;
  if (name == "quadratic_disc" || name == "scaled_quadratic") {
    const double c = (name == "quadratic_disc") ? 1.0 : param;
    e.u = buildGrid(discDomain(1.0, h), h);
    // exact sampling everywhere; boundary nodes on lattice chords sit
    // slightly inside the circle and carry the (tiny, negative) exact value
    for (size_t i = 0; i < e.u.nodes.size(); ++i)
      e.u.values[i] = c * (sqnorm(e.u.nodes[i]) - 1.0) * 0.5;
    for (int i = 0; i < e.u.nInterior; ++i) e.u.grad[i] = e.u.nodes[i] * c;
    e.fConst = c * c;
    e.exactHessian = Mat2::diagonal(vec2(c, c));
  } else if (name == "anisotropic_quadratic") {
    const double a = param;
    if (!(a > 0)) throw UnknownName("anisotropic_quadratic needs a > 0");
    e.u = buildGrid(ellipseDomain(1.0 / std::sqrt(a), std::sqrt(a), h), h);
    for (size_t i = 0; i < e.u.nodes.size(); ++i) {
      const Vec2 x = e.u.nodes[i];
      e.u.values[i] = 0.5 * (a * x[0] * x[0] + x[1] * x[1] / a - 1.0);
    }
    for (int i = 0; i < e.u.nInterior; ++i) {
      const Vec2 x = e.u.nodes[i];
      e.u.grad[i] = vec2(a * x[0], x[1] / a);
    }
    e.fConst = 1.0;
    e.exactHessian = Mat2::diagonal(vec2(a, 1.0 / a));
  } else {
    throw UnknownName("catalog entry '" + name + "'");
  }
  for (int i = 0; i < e.u.nInterior; ++i) {
    e.u.hess[i] = e.exactHessian;
    e.u.hessKnown[i] = 1;
  }
  return e;
}

}  // namespace malab
