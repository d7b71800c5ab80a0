#pragma once

#include <cmath>

#include "errors.hpp"
#include "geometry.hpp"

namespace malab {

// Invertible orientation-preserving affine map x -> A x + b, with the
// quantities the estimates keep asking for cached once: det A, the operator
// norms of A and its adjoint, and the inverse map.
template <int N>
struct AffineMap {
  Mat<N> A;
  Vec<N> b{};
  double detA = 1;
  double normA = 1;      // ||A||   (spectral)
  double normAdj = 1;    // ||A*||  (computed independently from A A*)
  Mat<N> Ainv;

  static AffineMap make(const Mat<N>& A, const Vec<N>& b) {
    AffineMap m;
    m.A = A;
    m.b = b;
    m.detA = det(A);
    if (!(m.detA > 0)) throw DegenerateBody("affine map must preserve orientation (det > 0)");
    m.normA = operatorNorm(A);
    const auto e = symEigen(Mat<N>(A * A.transposed()));
    m.normAdj = std::sqrt(std::max(0.0, e.values[N - 1]));
    m.Ainv = inverse(A);
    return m;
  }

  static AffineMap identity() { return make(Mat<N>::identity(), Vec<N>{}); }

  Vec<N> operator()(const Vec<N>& x) const { return A * x + b; }
  Vec<N> applyInverse(const Vec<N>& z) const { return Ainv * (z - b); }

  AffineMap inverseMap() const { return make(Ainv, -(Ainv * b)); }

  // the normalization size ||T|| ||T*|| / (det T)^{2/n} the lemmas compare against
  double normalizationSize() const { return normA * normAdj / std::pow(detA, 2.0 / N); }
};

using Map2 = AffineMap<2>;
using Map3 = AffineMap<3>;

// composition: (f after g)(x) = f(g(x))
template <int N>
inline AffineMap<N> compose(const AffineMap<N>& f, const AffineMap<N>& g) {
  return AffineMap<N>::make(f.A * g.A, f.A * g.b + f.b);
}

}  // namespace malab
