#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "convex_body.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "polygon.hpp"

namespace malab {

// Regular lattice clipped to a convex domain. Interior nodes sit on exact
// integer multiples of h (so refining h -> h/2 keeps old nodes in place);
// boundary nodes are the intersections of lattice lines with the domain
// polygon, plus its vertices, and carry the Dirichlet data.
struct GridLayout {
  double h = 0;
  int i0 = 0, j0 = 0, nx = 0, ny = 0;   // lattice index window
  std::vector<int> cell;                // (i,j) -> node id, -1 outside

  int idAt(int i, int j) const {
    const int a = i - i0, b = j - j0;
    if (a < 0 || b < 0 || a >= nx || b >= ny) return -1;
    return cell[static_cast<size_t>(b) * nx + a];
  }
};

// Piecewise-linear convex function sampled on the grid: values, slopes,
// and a discrete Hessian field. Interior nodes come first in every array;
// boundary nodes (on the domain polygon) follow.
struct PLConvexFunction {
  Body2 domain;
  GridLayout grid;
  std::vector<Vec2> nodes;
  int nInterior = 0;
  std::vector<double> values;
  std::vector<Vec2> grad;            // per interior node: an element of the subdifferential
  std::vector<Mat2> hess;            // per interior node with a full radius-2 stencil
  std::vector<char> hessKnown;
  std::vector<double> convexDefect;  // pre-projection negative eigenvalue, diagnostic
  std::vector<double> dualArea;      // interior dual-cell areas; tile the domain exactly

  bool isInterior(int id) const { return id < nInterior; }

  double oscillation() const {
    double lo = values[0], hi = values[0];
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  }

  double infValue() const {
    double lo = values[0];
    for (int i = 0; i < nInterior; ++i) lo = std::min(lo, values[i]);
    return lo;
  }

  // PL interpolation on the lattice square containing p (split along the
  // main diagonal). Requires all four corners to be grid nodes.
  double interpolate(const Vec2& p) const {
    const double gx = p[0] / grid.h, gy = p[1] / grid.h;
    int i = static_cast<int>(std::floor(gx)), j = static_cast<int>(std::floor(gy));
    double fx = gx - i, fy = gy - j;
    // nudge exact upper-edge hits into the window
    if (grid.idAt(i + 1, j) < 0 && fx < 1e-12 && grid.idAt(i, j) >= 0) {
      --i;
      fx = 1.0;
    }
    if (grid.idAt(i, j + 1) < 0 && fy < 1e-12 && grid.idAt(i, j) >= 0) {
      --j;
      fy = 1.0;
    }
    const int n00 = grid.idAt(i, j), n10 = grid.idAt(i + 1, j);
    const int n01 = grid.idAt(i, j + 1), n11 = grid.idAt(i + 1, j + 1);
    if (n00 < 0 || n10 < 0 || n01 < 0 || n11 < 0)
      throw BoundaryStencil("interpolation cell leaves the grid");
    const double v00 = values[n00], v10 = values[n10], v01 = values[n01], v11 = values[n11];
    if (fx + fy <= 1.0) return v00 + (v10 - v00) * fx + (v01 - v00) * fy;
    return v11 + (v01 - v11) * (1.0 - fx) + (v10 - v11) * (1.0 - fy);
  }
};

namespace detail {

inline void addBoundaryNode(std::vector<Vec2>& out, const Vec2& p, double tol) {
  for (const auto& q : out)
    if (norm(q - p) < tol) return;
  out.push_back(p);
}

}  // namespace detail

// Lattice-line intersections with the polygon boundary plus the polygon's
// own vertices: the Dirichlet trace of the grid.
inline std::vector<Vec2> boundaryNodesOf(const Polygon& poly, double h) {
  std::vector<Vec2> out;
  const double tol = 1e-9 * h;
  const int n = static_cast<int>(poly.size());
  for (int e = 0; e < n; ++e) {
    const Vec2 a = poly[e], b = poly[(e + 1) % n];
    detail::addBoundaryNode(out, a, tol);
    for (int axis = 0; axis < 2; ++axis) {
      const double lo = std::min(a[axis], b[axis]), hi = std::max(a[axis], b[axis]);
      for (int k = static_cast<int>(std::ceil(lo / h)); k * h <= hi; ++k) {
        const double denom = b[axis] - a[axis];
        if (std::abs(denom) < tol) break;
        const double t = (k * h - a[axis]) / denom;
        if (t <= 0 || t >= 1) continue;
        detail::addBoundaryNode(out, a + (b - a) * t, tol);
      }
    }
  }
  return out;
}

// Build the discretization of a convex domain at spacing h: interior lattice
// nodes (kept away from the boundary by a quarter cell), boundary nodes, and
// the dual-cell areas used for all quadrature. Dual cells are the Voronoi
// cells of the interior nodes clipped to the domain, which tile it exactly;
// away from the boundary they are plain h-squares.
inline PLConvexFunction buildGrid(const Body2& domain, double h) {
  PLConvexFunction u;
  u.domain = domain;
  u.grid.h = h;
  const Box2 bb = domain.bounds();
  const int iMin = static_cast<int>(std::floor(bb.lo[0] / h)) - 2;
  const int iMax = static_cast<int>(std::ceil(bb.hi[0] / h)) + 2;
  const int jMin = static_cast<int>(std::floor(bb.lo[1] / h)) - 2;
  const int jMax = static_cast<int>(std::ceil(bb.hi[1] / h)) + 2;
  u.grid.i0 = iMin;
  u.grid.j0 = jMin;
  u.grid.nx = iMax - iMin + 1;
  u.grid.ny = jMax - jMin + 1;
  u.grid.cell.assign(static_cast<size_t>(u.grid.nx) * u.grid.ny, -1);

  const double margin = 0.25 * h;
  for (int j = jMin; j <= jMax; ++j)
    for (int i = iMin; i <= iMax; ++i) {
      const Vec2 p = vec2(i * h, j * h);
      if (domain.facetClearance(p) >= margin) {
        u.grid.cell[static_cast<size_t>(j - jMin) * u.grid.nx + (i - iMin)] =
            static_cast<int>(u.nodes.size());
        u.nodes.push_back(p);
      }
    }
  u.nInterior = static_cast<int>(u.nodes.size());
  if (u.nInterior == 0) throw DegenerateBody("grid resolves no interior nodes");

  for (const auto& p : boundaryNodesOf(domain.vertices, h)) u.nodes.push_back(p);
  u.values.assign(u.nodes.size(), 0.0);
  u.grad.assign(u.nInterior, Vec2{});
  u.hess.assign(u.nInterior, Mat2{});
  u.hessKnown.assign(u.nInterior, 0);
  u.convexDefect.assign(u.nInterior, 0.0);

  // dual cells: Voronoi of the interior nodes, clipped to the domain. Away
  // from the boundary the ring-1 midlines already cut the h-square; near the
  // boundary cells can widen into wedges, so clip against the full ring-4
  // neighborhood (anything farther cannot reach a polygon-clipped cell)
  u.dualArea.assign(u.nInterior, 0.0);
  for (int id = 0; id < u.nInterior; ++id) {
    const Vec2 x = u.nodes[id];
    Polygon cellPoly(domain.vertices);
    const int ci = static_cast<int>(std::llround(x[0] / h));
    const int cj = static_cast<int>(std::llround(x[1] / h));
    for (int dj = -4; dj <= 4 && !cellPoly.empty(); ++dj)
      for (int di = -4; di <= 4 && !cellPoly.empty(); ++di) {
        if (di == 0 && dj == 0) continue;
        const int nb = u.grid.idAt(ci + di, cj + dj);
        if (nb < 0) continue;
        const Vec2 y = u.nodes[nb];
        const Vec2 mid = (x + y) * 0.5;
        const Vec2 dir = y - x;
        cellPoly = clipHalfPlane(cellPoly, dir, dot(dir, mid));
      }
    u.dualArea[id] = polygonArea(cellPoly);
  }
  return u;
}

// 5x5 least-squares quadratic fit: the pseudoinverse of the canonical design
// matrix (unit spacing) is precomputed once; rows are ordered dy-major to
// match the sampling loop below.
namespace detail {

struct QuadFit {
  // 6 x 25 pseudoinverse for basis {1, s, t, s^2, s t, t^2}
  std::array<std::array<double, 25>, 6> pinv;

  QuadFit() {
    std::array<std::array<double, 6>, 25> phi{};
    int r = 0;
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di, ++r)
        phi[r] = {1.0,
                  static_cast<double>(di),
                  static_cast<double>(dj),
                  static_cast<double>(di * di),
                  static_cast<double>(di * dj),
                  static_cast<double>(dj * dj)};
    Mat<6> ata;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        double s = 0;
        for (int k = 0; k < 25; ++k) s += phi[k][a] * phi[k][b];
        ata(a, b) = s;
      }
    const Mat<6> inv = gaussInverse(ata);
    for (int a = 0; a < 6; ++a)
      for (int k = 0; k < 25; ++k) {
        double s = 0;
        for (int b = 0; b < 6; ++b) s += inv(a, b) * phi[k][b];
        pinv[a][k] = s;
      }
  }
};

inline const QuadFit& quadFit() {
  static const QuadFit f;
  return f;
}

}  // namespace detail

// Least-squares quadratic model at an interior node with a full radius-2
// stencil. Returns the raw (pre-projection) Hessian and the fitted slope.
inline bool quadraticModelAt(const PLConvexFunction& u, int id, Mat2& hessOut, Vec2& gradOut) {
  const Vec2 x = u.nodes[id];
  const double h = u.grid.h;
  const int ci = static_cast<int>(std::llround(x[0] / h));
  const int cj = static_cast<int>(std::llround(x[1] / h));
  std::array<double, 25> sample{};
  int r = 0;
  for (int dj = -2; dj <= 2; ++dj)
    for (int di = -2; di <= 2; ++di, ++r) {
      const int nb = u.grid.idAt(ci + di, cj + dj);
      if (nb < 0) return false;
      sample[r] = u.values[nb];
    }
  const auto& fit = detail::quadFit();
  double c[6];
  for (int a = 0; a < 6; ++a) {
    double s = 0;
    for (int k = 0; k < 25; ++k) s += fit.pinv[a][k] * sample[k];
    c[a] = s;
  }
  gradOut = vec2(c[1] / h, c[2] / h);
  hessOut(0, 0) = 2.0 * c[3] / (h * h);
  hessOut(0, 1) = c[4] / (h * h);
  hessOut(1, 0) = c[4] / (h * h);
  hessOut(1, 1) = 2.0 * c[5] / (h * h);
  return true;
}

// Discrete Hessian at one node: quadratic fit, symmetrize, clamp the
// eigenvalues at zero. The pre-projection smallest eigenvalue lands in
// convexDefect when negative (convexity diagnostic).
inline Mat2 discreteHessian(PLConvexFunction& u, int id) {
  if (!u.isInterior(id)) throw BoundaryStencil("hessian requested at a boundary node");
  Mat2 raw;
  Vec2 slope;
  if (!quadraticModelAt(u, id, raw, slope))
    throw BoundaryStencil("hessian stencil leaves the domain");
  const auto e = symEigen(raw);
  u.convexDefect[id] = std::min(0.0, e.values[0]);
  Mat2 proj;
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) {
      double v = 0;
      for (int k = 0; k < 2; ++k)
        v += e.vectors(r, k) * std::max(0.0, e.values[k]) * e.vectors(s, k);
      proj(r, s) = v;
    }
  return proj;
}

// Fill the Hessian field everywhere a full stencil exists.
inline void computeHessianField(PLConvexFunction& u) {
  for (int id = 0; id < u.nInterior; ++id) {
    Mat2 raw;
    Vec2 slope;
    if (!quadraticModelAt(u, id, raw, slope)) {
      u.hessKnown[id] = 0;
      continue;
    }
    const auto e = symEigen(raw);
    u.convexDefect[id] = std::min(0.0, e.values[0]);
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s) {
        double v = 0;
        for (int k = 0; k < 2; ++k)
          v += e.vectors(r, k) * std::max(0.0, e.values[k]) * e.vectors(s, k);
        u.hess[id](r, s) = v;
      }
    u.hessKnown[id] = 1;
  }
}

inline double hessNorm(const Mat2& m) {
  // for a PSD symmetric 2x2 the operator norm is the top eigenvalue
  const double tr = m(0, 0) + m(1, 1);
  const double dt = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - dt));
  return 0.5 * tr + disc;
}

}  // namespace malab
