#pragma once

#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "hull3.hpp"
#include "polygon.hpp"

namespace malab {

// Bounded full-dimensional convex polytope with both representations:
// extreme vertices and facet half-spaces {x : n.x <= off}. For N = 2 the
// vertices are kept in CCW order; for N = 3 they are the hull vertex set
// and facets come from the incremental hull. Volume and centroid are
// computed once at construction; bodies are immutable afterwards.
template <int N>
struct ConvexBody {
  struct Facet {
    Vec<N> normal;  // unit outward
    double offset;  // plane is normal.x = offset
  };

  std::vector<Vec<N>> vertices;
  std::vector<Facet> facets;
  double vol = 0;
  Vec<N> center{};  // centroid

  static ConvexBody fromPoints(const std::vector<Vec<N>>& pts);

  bool contains(const Vec<N>& x, double tol = 1e-9) const {
    for (const auto& f : facets)
      if (dot(f.normal, x) > f.offset + tol) return false;
    return true;
  }

  // max signed violation of the half-space system; <= 0 means inside
  double membershipGap(const Vec<N>& x) const {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& f : facets) g = std::max(g, dot(f.normal, x) - f.offset);
    return g;
  }

  double volume() const { return vol; }
  const Vec<N>& centroid() const { return center; }

  Box<N> bounds() const {
    Box<N> b = Box<N>::empty();
    for (const auto& v : vertices) b.expand(v);
    return b;
  }

  // homothety about c with ratio tau
  ConvexBody dilated(const Vec<N>& c, double tau) const {
    ConvexBody out;
    out.vertices.reserve(vertices.size());
    for (const auto& v : vertices) out.vertices.push_back(c + (v - c) * tau);
    out.facets.reserve(facets.size());
    for (const auto& f : facets)
      out.facets.push_back(Facet{f.normal, tau * f.offset + (1.0 - tau) * dot(f.normal, c)});
    out.vol = vol * std::pow(tau, N);
    out.center = c + (center - c) * tau;
    return out;
  }

  // min over facets of (offset - n.x): positive inside, and the largest
  // ball around x inside the body has exactly this radius
  double facetClearance(const Vec<N>& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& f : facets) d = std::min(d, f.offset - dot(f.normal, x));
    return d;
  }
};

template <>
inline ConvexBody<2> ConvexBody<2>::fromPoints(const std::vector<Vec2>& pts) {
  ConvexBody<2> b;
  b.vertices = convexHull2(pts);
  if (b.vertices.size() < 3 || polygonArea(b.vertices) <= 0)
    throw DegenerateBody("2d body needs a nonempty interior");
  const int n = static_cast<int>(b.vertices.size());
  b.facets.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 e = b.vertices[(i + 1) % n] - b.vertices[i];
    Vec2 nor = vec2(e[1], -e[0]);
    const double len = norm(nor);
    if (len < 1e-300) continue;
    nor = nor / len;
    b.facets.push_back(Facet{nor, dot(nor, b.vertices[i])});
  }
  b.vol = polygonArea(b.vertices);
  b.center = polygonCentroid(b.vertices);
  return b;
}

template <>
inline ConvexBody<3> ConvexBody<3>::fromPoints(const std::vector<Vec3>& pts) {
  const Hull3 hull = convexHull3(pts);
  ConvexBody<3> b;
  std::vector<char> used(pts.size(), 0);
  double vol6 = 0;
  Vec3 cen = vec3(0, 0, 0);
  for (const auto& f : hull.faces) {
    used[f.a] = used[f.b] = used[f.c] = 1;
    b.facets.push_back(Facet{f.n, f.off});
    const Vec3& a = hull.pts[f.a];
    const Vec3& p = hull.pts[f.b];
    const Vec3& q = hull.pts[f.c];
    const double w = dot(cross(p - a, q - a), a);  // 6x signed tet volume
    vol6 += w;
    cen += (a + p + q) * (w / 4.0);
  }
  for (size_t i = 0; i < pts.size(); ++i)
    if (used[i]) b.vertices.push_back(pts[i]);
  if (b.vertices.size() < 4 || vol6 <= 0)
    throw DegenerateBody("3d body needs a nonempty interior");
  b.vol = vol6 / 6.0;
  b.center = cen / vol6;
  return b;
}

using Body2 = ConvexBody<2>;
using Body3 = ConvexBody<3>;

inline Body2 bodyFromPolygon(const Polygon& p) { return Body2::fromPoints(p); }

}  // namespace malab
