#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace malab {

// Convex polygon, vertices in CCW order, no duplicates. Kept as a plain
// vertex list; all routines below assume (and preserve) convexity.
using Polygon = std::vector<Vec2>;

// Andrew monotone chain. Collinear points on the hull boundary are dropped.
inline Polygon convexHull2(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  Polygon h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && orient2d(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && orient2d(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline double polygonArea(const Polygon& p) {
  const int n = static_cast<int>(p.size());
  if (n < 3) return 0.0;
  double a = 0;
  for (int i = 0; i < n; ++i) a += cross(p[i], p[(i + 1) % n]);
  return 0.5 * a;
}

inline Vec2 polygonCentroid(const Polygon& p) {
  const int n = static_cast<int>(p.size());
  if (n == 0) throw DegenerateBody("centroid of empty polygon");
  if (n == 1) return p[0];
  if (n == 2) return (p[0] + p[1]) * 0.5;
  double a = 0;
  Vec2 c = vec2(0, 0);
  for (int i = 0; i < n; ++i) {
    const double w = cross(p[i], p[(i + 1) % n]);
    a += w;
    c += (p[i] + p[(i + 1) % n]) * w;
  }
  if (std::abs(a) < 1e-300) {
    // collapsed to a segment; fall back to vertex average
    Vec2 s = vec2(0, 0);
    for (const auto& v : p) s += v;
    return s / n;
  }
  return c / (3.0 * a);
}

// Clip polygon against the half-plane {x : n.x <= b}. Sutherland-Hodgman step.
inline Polygon clipHalfPlane(const Polygon& poly, const Vec2& nrm, double b) {
  Polygon out;
  const int n = static_cast<int>(poly.size());
  if (n == 0) return out;
  out.reserve(n + 2);
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& c = poly[(i + 1) % n];
    const double da = dot(nrm, a) - b;
    const double dc = dot(nrm, c) - b;
    if (da <= 0) out.push_back(a);
    if ((da < 0 && dc > 0) || (da > 0 && dc < 0)) {
      const double t = da / (da - dc);
      out.push_back(a + (c - a) * t);
    }
  }
  return out;
}

// Clip and also report the chord length produced by this half-plane's edge
// (zero when the plane does not cut the polygon). Used for Jacobian assembly.
inline Polygon clipHalfPlane(const Polygon& poly, const Vec2& nrm, double b, double& chordLen) {
  Polygon out = clipHalfPlane(poly, nrm, b);
  chordLen = 0.0;
  const int m = static_cast<int>(out.size());
  const double scale = std::sqrt(sqnorm(nrm));
  if (scale == 0.0) return out;
  // the cut edge is the (unique, by convexity) edge lying on n.x = b
  for (int i = 0; i < m; ++i) {
    const Vec2& a = out[i];
    const Vec2& c = out[(i + 1) % m];
    const double da = std::abs(dot(nrm, a) - b) / scale;
    const double dc = std::abs(dot(nrm, c) - b) / scale;
    if (da < 1e-9 && dc < 1e-9) {
      chordLen = norm(c - a);
      return out;
    }
  }
  return out;
}

inline bool polygonContains(const Polygon& p, const Vec2& x, double tol = 1e-12) {
  const int n = static_cast<int>(p.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    if (orient2d(p[i], p[(i + 1) % n], x) < -tol) return false;
  }
  return true;
}

inline Box2 polygonBounds(const Polygon& p) {
  Box2 b = Box2::empty();
  for (const auto& v : p) b.expand(v);
  return b;
}

// Gauge (Minkowski functional) of the polygon with respect to an interior
// point c: smallest s >= 0 with x in c + s*(P - c). Infinity for a direction
// that never exits (cannot happen for bounded P unless x == c).
inline double polygonGauge(const Polygon& p, const Vec2& c, const Vec2& x) {
  const Vec2 d = x - c;
  if (sqnorm(d) == 0.0) return 0.0;
  const int n = static_cast<int>(p.size());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    // edge (a,b): outward normal test against ray c + t d
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    const Vec2 e = b - a;
    const Vec2 nrm = vec2(e[1], -e[0]);  // outward for CCW
    const double denom = dot(nrm, d);
    if (denom <= 0) continue;
    const double t = dot(nrm, a - c) / denom;
    if (t > 0) best = std::min(best, t);
  }
  if (!std::isfinite(best)) throw DegenerateBody("gauge ray found no exit edge");
  // the ray exits at c + best*(x-c), so the gauge of x is 1/best
  return 1.0 / best;
}

// Largest radius r with B(c, r) contained in P.
inline double polygonInradiusAt(const Polygon& p, const Vec2& c) {
  const int n = static_cast<int>(p.size());
  if (n < 3) return 0.0;
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len < 1e-300) continue;
    r = std::min(r, orient2d(a, b, c) / len);
  }
  return std::max(0.0, r);
}

inline double polygonCircumradiusAt(const Polygon& p, const Vec2& c) {
  double r = 0;
  for (const auto& v : p) r = std::max(r, norm(v - c));
  return r;
}

// Dilation of P about center c by factor tau.
inline Polygon polygonDilate(const Polygon& p, const Vec2& c, double tau) {
  Polygon out;
  out.reserve(p.size());
  for (const auto& v : p) out.push_back(c + (v - c) * tau);
  return out;
}

// Area of intersection of two convex polygons.
inline double convexIntersectionArea(const Polygon& p, const Polygon& q) {
  Polygon r = p;
  const int n = static_cast<int>(q.size());
  for (int i = 0; i < n && !r.empty(); ++i) {
    const Vec2& a = q[i];
    const Vec2& b = q[(i + 1) % n];
    const Vec2 e = b - a;
    const Vec2 nrm = vec2(e[1], -e[0]);  // points outward; keep n.x <= n.a
    r = clipHalfPlane(r, nrm, dot(nrm, a));
  }
  return polygonArea(r);
}

// Convex polygon whose edges remember which clipping plane created them.
// Edge i runs from v[i] to v[(i+1)%size] and carries label[i].
struct LabeledPolygon {
  std::vector<Vec2> v;
  std::vector<int> label;

  bool empty() const { return v.size() < 3; }
  double area() const { return polygonArea(v); }
};

// Clip against {x : n.x <= b}; the freshly cut edge gets `planeId`,
// surviving edge pieces keep their labels.
inline LabeledPolygon clipLabeled(const LabeledPolygon& poly, const Vec2& nrm, double b,
                                  int planeId) {
  LabeledPolygon out;
  const int n = static_cast<int>(poly.v.size());
  if (n == 0) return out;
  out.v.reserve(n + 2);
  out.label.reserve(n + 2);
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly.v[i];
    const Vec2& c = poly.v[(i + 1) % n];
    const int lab = poly.label[i];
    const double da = dot(nrm, a) - b;
    const double dc = dot(nrm, c) - b;
    if (da <= 0) {
      out.v.push_back(a);
      out.label.push_back(lab);
      if (dc > 0) {
        const double t = da / (da - dc);
        out.v.push_back(a + (c - a) * t);
        out.label.push_back(planeId);
      }
    } else if (dc < 0) {
      const double t = da / (da - dc);
      out.v.push_back(a + (c - a) * t);
      out.label.push_back(lab);
    }
  }
  return out;
}

// Total boundary length contributed by edges with a given label.
inline double labeledEdgeLength(const LabeledPolygon& p, int planeId) {
  double len = 0;
  const int n = static_cast<int>(p.v.size());
  for (int i = 0; i < n; ++i)
    if (p.label[i] == planeId) len += norm(p.v[(i + 1) % n] - p.v[i]);
  return len;
}

// Regular m-gon approximation of a disc; used to build test domains.
inline Polygon discPolygon(const Vec2& c, double radius, int m) {
  Polygon p;
  p.reserve(m);
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * pi() * i / m;
    p.push_back(c + vec2(radius * std::cos(t), radius * std::sin(t)));
  }
  return p;
}

}  // namespace malab
