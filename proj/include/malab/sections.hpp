#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "convex_body.hpp"
#include "errors.hpp"
#include "grid_function.hpp"
#include "polygon.hpp"
#include "rng.hpp"

namespace malab {

// A section of a convex function: the sublevel set of u below the supporting
// plane at x lifted by t. Node-set representation with the hull attached; the
// hull underestimates the continuous section by at most one grid cell.
struct Section {
  int centerId = -1;
  Vec2 x{};
  Vec2 p{};                // supporting slope at x (subdifferential selection)
  double t = 0;
  std::vector<int> nodes;  // ids (interior and boundary) inside the sublevel set
  Polygon hull;            // may be a point or segment at tiny t
  bool touchesBoundary = false;

  double excess(const PLConvexFunction& u, const Vec2& y) const {
    // u(y) - supporting plane at height t; <= 0 iff y is in the section
    return u.interpolate(y) - (u.values[centerId] + dot(p, y - x) + t);
  }
  bool containsNode(const PLConvexFunction& u, int j) const {
    return u.values[j] <= u.values[centerId] + dot(p, u.nodes[j] - x) + t + 1e-14;
  }
  Body2 body() const { return bodyFromPolygon(hull); }
  double hullArea() const { return polygonArea(hull); }
};

// Extract S(x, p, t) with p = the gradient selection stored on u. When
// requireInterior is set, a section reaching the boundary nodes throws
// EscapesDomain; callers probing for safe heights pass false and read the
// touchesBoundary flag instead.
inline Section section(const PLConvexFunction& u, int centerId, double t,
                       bool requireInterior = true) {
  if (!u.isInterior(centerId)) throw BoundaryStencil("section centered on a boundary node");
  if (t < 0) throw EmptySection("negative section height");
  Section s;
  s.centerId = centerId;
  s.x = u.nodes[centerId];
  s.p = u.grad[centerId];
  s.t = t;
  const double base = u.values[centerId];
  const int total = static_cast<int>(u.nodes.size());
  Polygon pts;
  for (int j = 0; j < total; ++j) {
    if (u.values[j] <= base + dot(s.p, u.nodes[j] - s.x) + t + 1e-14) {
      s.nodes.push_back(j);
      pts.push_back(u.nodes[j]);
      if (!u.isInterior(j)) s.touchesBoundary = true;
    }
  }
  if (s.nodes.empty()) throw EmptySection("section lost its own center");
  if (requireInterior && s.touchesBoundary)
    throw EscapesDomain("section at node " + std::to_string(centerId) +
                        " with height " + std::to_string(t) + " reaches the boundary");
  s.hull = pts.size() >= 3 ? convexHull2(pts) : pts;
  return s;
}

// tau-dilation about the section center per (y - x)/tau membership rule:
// a plain homothety of the region.
inline Polygon dilate(const Section& s, double tau) {
  if (!(tau > 0)) throw EmptySection("dilation ratio must be positive");
  return polygonDilate(s.hull, s.x, tau);
}

// Interior nodes of the section (the integration set for section averages).
inline std::vector<int> interiorNodes(const PLConvexFunction& u, const Section& s) {
  std::vector<int> out;
  for (int j : s.nodes)
    if (u.isInterior(j)) out.push_back(j);
  return out;
}

// Low-discrepancy sample of interior node ids inside a region: Halton points
// over the bounding box, snapped to the nearest lattice node, deduplicated.
// Deterministic by construction.
inline std::vector<int> sampleCenters(const PLConvexFunction& u, const Body2& region,
                                      int count) {
  std::vector<int> out;
  std::vector<char> taken(u.nodes.size(), 0);
  const Box<2> box = region.bounds();
  const Vec2 side = box.hi - box.lo;
  const double h = u.grid.h;
  for (std::uint64_t k = 0; k < 400u * static_cast<std::uint64_t>(count); ++k) {
    if (static_cast<int>(out.size()) >= count) break;
    const Vec2 q = halton2(k);
    const Vec2 p = box.lo + vec2(q[0] * side[0], q[1] * side[1]);
    if (!region.contains(p)) continue;
    const int id = u.grid.idAt(static_cast<int>(std::lround(p[0] / h)),
                               static_cast<int>(std::lround(p[1] / h)));
    if (id < 0 || !u.isInterior(id) || taken[id]) continue;
    if (!region.contains(u.nodes[id])) continue;
    taken[id] = 1;
    out.push_back(id);
  }
  if (out.empty()) {
    for (int i = 0; i < u.nInterior && static_cast<int>(out.size()) < count; ++i)
      if (region.contains(u.nodes[i])) out.push_back(i);
  }
  return out;
}

}  // namespace malab
