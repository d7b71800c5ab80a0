#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sections.hpp"

namespace malab {

struct CoverCandidate {
  int centerId = -1;
  double t = 0;
};

struct CoverResult {
  std::vector<int> picked;        // indices into the candidate list
  std::vector<Section> sections;  // full-height sections of the picked family
  std::vector<int> overlap;       // per interior node: shrunken-family count
  int maxOverlap = 0;
  double eps = 0;

  double overlapConstant() const {  // K with max overlap <= K |log eps|
    return maxOverlap / std::abs(std::log(eps));
  }
};

// Vitali-type greedy selection: walk candidates by decreasing height (ties
// broken lexicographically by center, then by id) and keep a section when its
// (1-eps) height-shrinking is disjoint from the already-kept shrinkings, or
// when its center is still uncovered - the second clause is what guarantees
// cover property (i) outright. Returns the kept family and the pointwise
// overlap profile of the shrunken sections.
inline CoverResult cover(const PLConvexFunction& u, const std::vector<CoverCandidate>& cands,
                         double eps) {
  if (!(eps > 0 && eps < 1)) throw UnknownName("cover needs eps in (0,1)");
  std::vector<int> order(cands.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cands[a].t != cands[b].t) return cands[a].t > cands[b].t;
    const Vec2 xa = u.nodes[cands[a].centerId], xb = u.nodes[cands[b].centerId];
    if (!(xa == xb)) return xa < xb;
    return a < b;
  });

  CoverResult res;
  res.eps = eps;
  std::vector<Polygon> shrunkHulls;
  std::vector<char> covered(u.nodes.size(), 0);

  auto markCovered = [&](const Section& s) {
    for (int z : s.nodes) covered[z] = 1;
  };
  // sub-resolution hulls (points, segments) meet when a point of one lies in
  // or on the other; full hulls meet when the clipped intersection has area
  auto hullsMeet = [](const Polygon& a, const Polygon& b) {
    if (a.size() >= 3 && b.size() >= 3) return convexIntersectionArea(a, b) > 1e-12;
    const Polygon& pts = a.size() < b.size() ? a : b;
    const Polygon& host = a.size() < b.size() ? b : a;
    for (const auto& v : pts) {
      if (host.size() >= 3 && polygonContains(host, v, 1e-12)) return true;
      if (host.size() < 3)
        for (const auto& w : host)
          if (norm(v - w) < 1e-12) return true;
    }
    return false;
  };

  for (int idx : order) {
    const auto& c = cands[idx];
    Section full = section(u, c.centerId, c.t, false);
    Section shrunk = section(u, c.centerId, (1.0 - eps) * c.t, false);
    bool disjoint = true;
    for (const auto& other : shrunkHulls)
      if (hullsMeet(shrunk.hull, other)) {
        disjoint = false;
        break;
      }
    if (disjoint || !covered[c.centerId]) {
      shrunkHulls.push_back(shrunk.hull);
      markCovered(full);
      res.picked.push_back(idx);
      res.sections.push_back(std::move(full));
    }
  }

  for (const auto& c : cands)
    if (!covered[c.centerId])
      throw NotCovered("candidate center " + std::to_string(c.centerId) +
                       " left uncovered by the greedy selection");

  // pointwise overlap of the shrunken family, counted on the exact sublevel
  // inequality (no hulls involved)
  res.overlap.assign(u.nInterior, 0);
  for (const Section& s : res.sections) {
    const double h = (1.0 - eps) * s.t;
    const double base = u.values[s.centerId];
    for (int z = 0; z < u.nInterior; ++z)
      if (u.values[z] <= base + dot(s.p, u.nodes[z] - s.x) + h + 1e-14) ++res.overlap[z];
  }
  for (int v : res.overlap) res.maxOverlap = std::max(res.maxOverlap, v);
  return res;
}

}  // namespace malab
