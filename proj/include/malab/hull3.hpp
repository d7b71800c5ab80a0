#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace malab {

// Convex hull of points in R^3, incremental construction. Quadratic worst
// case, which is fine at the sizes this library deals with (a few thousand
// lifted grid nodes). Coplanar points within tolerance are treated as
// interior, so the result may under-report flat patches; callers that only
// evaluate the hull as max/min of face planes are unaffected by that.
struct Hull3 {
  struct Face {
    int a, b, c;
    Vec3 n;      // outward unit normal
    double off;  // plane is n.x = off
  };

  std::vector<Vec3> pts;
  std::vector<Face> faces;
};

namespace detail {

inline Hull3::Face makeFace(const std::vector<Vec3>& pts, int a, int b, int c,
                            const Vec3& interior) {
  Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
  const double len = norm(n);
  if (len < 1e-300) throw DegenerateBody("hull face with collapsed normal");
  n = n / len;
  if (dot(n, interior - pts[a]) > 0) {
    std::swap(b, c);
    n = -n;
  }
  return Hull3::Face{a, b, c, n, dot(n, pts[a])};
}

}  // namespace detail

inline Hull3 convexHull3(const std::vector<Vec3>& input) {
  const int n = static_cast<int>(input.size());
  if (n < 4) throw DegenerateBody("hull of fewer than 4 points");

  Box3 bb = Box3::empty();
  for (const auto& p : input) bb.expand(p);
  const double diam = std::max(bb.diameter(), 1e-300);
  const double tol = 1e-9 * diam;

  // initial simplex: spread points picked greedily
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (input[i] < input[i0]) i0 = i;
  int i1 = -1;
  double best = tol;
  for (int i = 0; i < n; ++i) {
    const double d = norm(input[i] - input[i0]);
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  if (i1 < 0) throw DegenerateBody("hull input collapsed to a point");
  int i2 = -1;
  best = tol * diam;
  for (int i = 0; i < n; ++i) {
    const double d = norm(cross(input[i1] - input[i0], input[i] - input[i0]));
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (i2 < 0) throw DegenerateBody("hull input collapsed to a segment");
  Vec3 nrm = cross(input[i1] - input[i0], input[i2] - input[i0]);
  nrm = nrm / norm(nrm);
  int i3 = -1;
  best = tol;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(dot(nrm, input[i] - input[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (i3 < 0) throw DegenerateBody("hull input collapsed to a plane");

  Hull3 hull;
  hull.pts = input;
  const Vec3 interior =
      (input[i0] + input[i1] + input[i2] + input[i3]) * 0.25;
  hull.faces.push_back(detail::makeFace(input, i0, i1, i2, interior));
  hull.faces.push_back(detail::makeFace(input, i0, i1, i3, interior));
  hull.faces.push_back(detail::makeFace(input, i0, i2, i3, interior));
  hull.faces.push_back(detail::makeFace(input, i1, i2, i3, interior));

  std::vector<char> alive;
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    const Vec3& p = input[i];
    alive.assign(hull.faces.size(), 1);
    bool anyVisible = false;
    for (size_t f = 0; f < hull.faces.size(); ++f) {
      if (dot(hull.faces[f].n, p) - hull.faces[f].off > tol) {
        alive[f] = 0;
        anyVisible = true;
      }
    }
    if (!anyVisible) continue;

    // horizon = edges appearing in exactly one dead face
    std::unordered_map<long long, int> edgeCount;
    auto key = [n](int u, int v) {
      if (u > v) std::swap(u, v);
      return static_cast<long long>(u) * n + v;
    };
    for (size_t f = 0; f < hull.faces.size(); ++f) {
      if (alive[f]) continue;
      const auto& fc = hull.faces[f];
      ++edgeCount[key(fc.a, fc.b)];
      ++edgeCount[key(fc.b, fc.c)];
      ++edgeCount[key(fc.c, fc.a)];
    }
    std::vector<Hull3::Face> next;
    next.reserve(hull.faces.size());
    for (size_t f = 0; f < hull.faces.size(); ++f)
      if (alive[f]) next.push_back(hull.faces[f]);
    for (size_t f = 0; f < hull.faces.size(); ++f) {
      if (alive[f]) continue;
      const auto& fc = hull.faces[f];
      const int e[3][2] = {{fc.a, fc.b}, {fc.b, fc.c}, {fc.c, fc.a}};
      for (const auto& uv : e) {
        if (edgeCount[key(uv[0], uv[1])] == 1)
          next.push_back(detail::makeFace(input, uv[0], uv[1], i, interior));
      }
    }
    hull.faces = std::move(next);
  }
  return hull;
}

}  // namespace malab
