#pragma once

#include <cmath>
#include <vector>

#include "affine_map.hpp"
#include "convex_body.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace malab {

// Ellipsoid {x : (x-c)' P (x-c) <= 1}, P positive definite.
template <int N>
struct Ellipsoid {
  Vec<N> c;
  Mat<N> P;
};

// Minimum-volume enclosing ellipsoid of a point set, by Frank-Wolfe on the
// lifted log-det problem with Wolfe-Atwood away steps (first-order scheme,
// relative gap gapTol).
template <int N>
inline Ellipsoid<N> enclosingEllipsoid(const std::vector<Vec<N>>& pts, double gapTol = 1e-10,
                                       int maxIter = 200000) {
  constexpr int L = N + 1;
  const int m = static_cast<int>(pts.size());
  if (m < N + 1) throw DegenerateBody("too few points for an enclosing ellipsoid");

  std::vector<Vec<L>> q(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < N; ++k) q[i][k] = pts[i][k];
    q[i][N] = 1.0;
  }
  std::vector<double> lam(m, 1.0 / m);

  const double target = static_cast<double>(L);
  for (int iter = 0; iter < maxIter; ++iter) {
    Mat<L> M;
    for (int i = 0; i < m; ++i) {
      if (lam[i] == 0.0) continue;
      for (int r = 0; r < L; ++r)
        for (int s = 0; s < L; ++s) M(r, s) += lam[i] * q[i][r] * q[i][s];
    }
    const Mat<L> Minv = gaussInverse(M);
    int jMax = -1, jMin = -1;
    double gMax = -1, gMin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double g = dot(q[i], Minv * q[i]);
      if (g > gMax) {
        gMax = g;
        jMax = i;
      }
      if (lam[i] > 0 && g < gMin) {
        gMin = g;
        jMin = i;
      }
    }
    if (!std::isfinite(gMax)) throw DegenerateBody("ellipsoid moment matrix is singular");
    // optimal when every leverage equals L on the support
    if (gMax <= target * (1.0 + gapTol) && gMin >= target * (1.0 - gapTol)) break;

    // move toward e_i (add step) or away from it (drop step); the line
    // search along lam + beta (e_i - lam) has the closed-form optimum
    // beta = (g_i - L) / (L (g_i - 1)), negative for drop steps
    const int i = (gMax - target >= target - gMin) ? jMax : jMin;
    const double gi = (i == jMax) ? gMax : gMin;
    double beta = (gi - target) / (target * (gi - 1.0));
    beta = std::max(beta, -lam[i] / (1.0 - lam[i] + 1e-300));
    for (double& l : lam) l *= (1.0 - beta);
    lam[i] += beta;
    lam[i] = std::max(0.0, lam[i]);
  }

  Ellipsoid<N> e;
  for (int k = 0; k < N; ++k) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += lam[i] * pts[i][k];
    e.c[k] = s;
  }
  Mat<N> S;
  for (int i = 0; i < m; ++i) {
    if (lam[i] == 0.0) continue;
    const Vec<N> d = pts[i] - e.c;
    for (int r = 0; r < N; ++r)
      for (int s = 0; s < N; ++s) S(r, s) += lam[i] * d[r] * d[s];
  }
  e.P = gaussInverse(Mat<N>(S * static_cast<double>(N)));
  // inflate so every input point is inside exactly (kills the residual gap)
  double worst = 0;
  for (int i = 0; i < m; ++i) {
    const Vec<N> d = pts[i] - e.c;
    worst = std::max(worst, dot(d, e.P * d));
  }
  if (!(worst > 0) || !std::isfinite(worst)) throw DegenerateBody("enclosing ellipsoid collapsed");
  e.P = e.P * (1.0 / worst);
  return e;
}

// Polar of an ellipsoid about the origin (origin must be interior):
// {y : h_E(y) <= 1} is again an ellipsoid, computed by completing the square.
template <int N>
inline Ellipsoid<N> polarEllipsoid(const Ellipsoid<N>& e) {
  const Mat<N> Pinv = gaussInverse(e.P);
  Mat<N> M = Pinv;
  for (int r = 0; r < N; ++r)
    for (int s = 0; s < N; ++s) M(r, s) -= e.c[r] * e.c[s];
  const auto spec = symEigen(M);
  if (!(spec.values[0] > 0)) throw DegenerateBody("polar ellipsoid: origin not interior");
  const Mat<N> Minv = gaussInverse(M);
  const Vec<N> Mc = Minv * e.c;
  const double scale = 1.0 + dot(e.c, Mc);
  Ellipsoid<N> out;
  out.c = -Mc;
  out.P = M * (1.0 / scale);
  return out;
}

// Maximal inscribed ellipsoid of a convex body, via polar duality: at the
// optimal center d, the enclosing ellipsoid of the polar body (K-d)* is
// exactly the polar of the inscribed ellipsoid. Fixed-point iteration on d,
// warm interior start at the centroid. Every iterate is a genuinely
// inscribed ellipsoid, so the loop can stop on a stationary center.
template <int N>
inline Ellipsoid<N> inscribedEllipsoid(const ConvexBody<N>& body, double tol = 1e-11,
                                       int maxIter = 300) {
  Vec<N> d = body.centroid();
  const double scale = std::max(body.bounds().diameter(), 1e-300);
  Ellipsoid<N> inner;
  for (int iter = 0; iter < maxIter; ++iter) {
    std::vector<Vec<N>> polar;
    polar.reserve(body.facets.size());
    for (const auto& f : body.facets) {
      const double beta = f.offset - dot(f.normal, d);
      if (beta < 1e-13 * scale) throw DegenerateBody("inscribed ellipsoid: center hit a facet");
      polar.push_back(f.normal / beta);
    }
    const Ellipsoid<N> hat = enclosingEllipsoid(polar, 1e-12, 500000);
    inner = polarEllipsoid(hat);  // inscribed in body - d, by duality
    const Vec<N> shift = inner.c;
    inner.c += d;
    d += shift;
    if (norm(shift) <= tol * scale) return inner;
  }
  return inner;  // converged geometrically; a-posteriori checks guard callers
}

// John normalization: affine T with B(0,1) c T(body) c B(0,N), built by
// mapping the maximal inscribed ellipsoid onto the unit ball. Bodies that
// are already normalized return the identity. Both inclusions are verified
// before returning.
template <int N>
inline AffineMap<N> johnNormalize(const ConvexBody<N>& body) {
  const double tol = 1e-6;

  const auto checked = [&](const AffineMap<N>& T) {
    for (const auto& v : body.vertices)
      if (norm(T(v)) > N + tol) throw InclusionViolation("john: vertex escapes B(0,n)");
    for (const auto& f : body.facets) {
      // image facet of {n.x <= off} under T: (A^-T n) . z <= off + (A^-T n) . b
      const Vec<N> m = T.Ainv.transposed() * f.normal;
      const double len = norm(m);
      if (len < 1e-300) throw DegenerateBody("john: facet normal collapsed");
      if ((f.offset + dot(m, T.b)) / len < 1.0 - tol)
        throw InclusionViolation("john: unit ball escapes through a facet");
    }
    return T;
  };

  // already normalized -> nothing to do
  bool inner = body.facetClearance(Vec<N>{}) >= 1.0 - 1e-9;
  if (inner) {
    bool outer = true;
    for (const auto& v : body.vertices) outer = outer && norm(v) <= N + 1e-9;
    if (outer) return AffineMap<N>::identity();
  }

  const Ellipsoid<N> e = inscribedEllipsoid(body);
  const auto spec = symEigen(e.P);
  if (!(spec.values[0] > 0)) throw DegenerateBody("inscribed ellipsoid not positive definite");
  if (std::sqrt(spec.values[N - 1] / spec.values[0]) > 1e12)
    throw DegenerateBody("inscribed ellipsoid axis ratio beyond 1e12");

  const Mat<N> A = symSqrt(e.P);  // maps the inscribed ellipsoid to B(0,1)
  return checked(AffineMap<N>::make(A, -(A * e.c)));
}

}  // namespace malab
