#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "affine_map.hpp"
#include "john.hpp"
#include "sections.hpp"

namespace malab {

// A section renormalized to size one: T makes T(S(x,t)) hold B(0,1) and fit
// in B(0,n), and v is the rescaled height function
//   v(z) = (det T)^(2/n) [u(T^-1 z) - u(x) - p.(T^-1 z - x) - t],
// resampled on its own lattice over Z2 = T(S(x,2t)). v vanishes on the inner
// boundary del Z and equals (det T)^(2/n) t on del Z2.
struct NormalizedSolution {
  int centerId = -1;
  double t = 0;
  Map2 T;
  double scale = 1;        // (det T)^(2/n)
  Polygon Z;               // T(S(x,t)) hull
  PLConvexFunction v;      // sampled over Z2 = T(S(x,2t))
  double infZ = 0;         // min of v over nodes inside Z
  double boundaryBand = 0; // max |v| within 1.5 cells of del Z, diagnostic
  int cellsAcross = 0;     // Z diameter in v-grid cells, resolution diagnostic

  bool insideZ(const Vec2& z) const { return polygonContains(Z, z, 1e-12); }
};

// hvTarget caps the v-grid size; the spacing also never drops below ~1.5
// original cells mapped through T, so v never pretends to know u below its
// own resolution.
inline NormalizedSolution normalizeSection(const PLConvexFunction& u, int centerId, double t,
                                           int hvTarget = 64) {
  NormalizedSolution ns;
  ns.centerId = centerId;
  ns.t = t;

  const Section s1 = section(u, centerId, t);
  const Section s2 = section(u, centerId, 2 * t);
  const Body2 body = s1.body();
  ns.T = johnNormalize<2>(body);
  ns.scale = ns.T.detA;  // (det T)^(2/n) with n = 2

  ns.Z.reserve(s1.hull.size());
  for (const auto& v : s1.hull) ns.Z.push_back(ns.T(v));
  Polygon z2;
  z2.reserve(s2.hull.size());
  for (const auto& v : s2.hull) z2.push_back(ns.T(v));
  const Body2 z2body = bodyFromPolygon(z2);

  const Box<2> bb = polygonBounds(z2);
  const double wide = std::max(bb.hi[0] - bb.lo[0], bb.hi[1] - bb.lo[1]);
  const double hv = std::max(wide / hvTarget, 1.5 * u.grid.h * ns.T.normA);
  ns.v = buildGrid(z2body, hv);

  const Vec2 x = u.nodes[centerId];
  const Vec2 p = u.grad[centerId];
  const double base = u.values[centerId];
  for (size_t i = 0; i < ns.v.nodes.size(); ++i) {
    const Vec2 y = ns.T.applyInverse(ns.v.nodes[i]);
    double uy;
    try {
      uy = u.interpolate(y);
    } catch (const BoundaryStencil&) {
      throw EscapesDomain("renormalized node maps outside the resolved grid");
    }
    ns.v.values[i] = ns.scale * (uy - base - dot(p, y - x) - t);
  }

  ns.infZ = 0;
  for (size_t i = 0; i < ns.v.nodes.size(); ++i) {
    const Vec2 z = ns.v.nodes[i];
    if (ns.insideZ(z)) ns.infZ = std::min(ns.infZ, ns.v.values[i]);
    // distance to del Z along the gauge: |1 - gauge| * |z| approximates it
    const double gau = polygonGauge(ns.Z, vec2(0, 0), z);
    if (gau > 0 && std::abs(norm(z) * (1.0 - 1.0 / std::max(gau, 1e-12))) <= 1.5 * hv)
      ns.boundaryBand = std::max(ns.boundaryBand, std::abs(ns.v.values[i]));
  }
  double inr = polygonInradiusAt(ns.Z, vec2(0, 0));
  ns.cellsAcross = static_cast<int>(std::floor(2 * inr / hv));
  return ns;
}

}  // namespace malab
