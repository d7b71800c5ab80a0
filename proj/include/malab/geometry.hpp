#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>

namespace malab {

template <int N>
struct Vec {
  std::array<double, N> c{};

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  Vec operator+(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.c[i] = c[i] * s;
    return r;
  }
  Vec operator/(double s) const { return *this * (1.0 / s); }
  Vec operator-() const { return *this * -1.0; }
  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < N; ++i) c[i] *= s;
    return *this;
  }
  bool operator==(const Vec& o) const { return c == o.c; }

  // lexicographic, used for deterministic tie-breaking
  bool operator<(const Vec& o) const { return c < o.c; }
};

template <int N>
inline Vec<N> operator*(double s, const Vec<N>& v) {
  return v * s;
}

template <int N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0;
  for (int i = 0; i < N; ++i) s += a.c[i] * b.c[i];
  return s;
}

template <int N>
inline double sqnorm(const Vec<N>& v) {
  return dot(v, v);
}

template <int N>
inline double norm(const Vec<N>& v) {
  return std::sqrt(sqnorm(v));
}

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

inline Vec2 vec2(double x, double y) { return Vec2{{x, y}}; }
inline Vec3 vec3(double x, double y, double z) { return Vec3{{x, y, z}}; }

inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return vec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

// Signed twice-area of triangle (a,b,c); positive when CCW.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, c - a);
}

template <int N>
struct Mat {
  // row-major
  std::array<double, N * N> m{};

  double& operator()(int r, int c) { return m[r * N + c]; }
  double operator()(int r, int c) const { return m[r * N + c]; }

  static Mat identity() {
    Mat r;
    for (int i = 0; i < N; ++i) r(i, i) = 1.0;
    return r;
  }
  static Mat diagonal(const Vec<N>& d) {
    Mat r;
    for (int i = 0; i < N; ++i) r(i, i) = d[i];
    return r;
  }

  Mat operator+(const Mat& o) const {
    Mat r;
    for (int i = 0; i < N * N; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat operator-(const Mat& o) const {
    Mat r;
    for (int i = 0; i < N * N; ++i) r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat operator*(double s) const {
    Mat r;
    for (int i = 0; i < N * N; ++i) r.m[i] = m[i] * s;
    return r;
  }

  Vec<N> operator*(const Vec<N>& v) const {
    Vec<N> r;
    for (int i = 0; i < N; ++i) {
      double s = 0;
      for (int j = 0; j < N; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  Mat operator*(const Mat& o) const {
    Mat r;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double s = 0;
        for (int k = 0; k < N; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat transposed() const {
    Mat r;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

inline double det(const Mat2& a) { return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0); }

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline Mat2 inverse(const Mat2& a) {
  const double d = det(a);
  Mat2 r;
  r(0, 0) = a(1, 1) / d;
  r(0, 1) = -a(0, 1) / d;
  r(1, 0) = -a(1, 0) / d;
  r(1, 1) = a(0, 0) / d;
  return r;
}

inline Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return r;
}

// Gauss-Jordan with partial pivoting; for the small lifted systems where a
// closed-form inverse is not written out.
template <int N>
inline Mat<N> gaussInverse(Mat<N> a) {
  Mat<N> inv = Mat<N>::identity();
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300) {
      // singular; surface as NaNs, callers check det separately
      for (double& x : inv.m) x = std::numeric_limits<double>::quiet_NaN();
      return inv;
    }
    if (piv != col)
      for (int k = 0; k < N; ++k) {
        std::swap(a(piv, k), a(col, k));
        std::swap(inv(piv, k), inv(col, k));
      }
    const double d = a(col, col);
    for (int k = 0; k < N; ++k) {
      a(col, k) /= d;
      inv(col, k) /= d;
    }
    for (int r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int k = 0; k < N; ++k) {
        a(r, k) -= f * a(col, k);
        inv(r, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

template <int N>
struct SymEigen {
  Vec<N> values;   // ascending
  Mat<N> vectors;  // columns, matching order
};

// Cyclic Jacobi for small symmetric matrices. Input is symmetrized first.
template <int N>
inline SymEigen<N> symEigen(const Mat<N>& a0) {
  Mat<N> a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = 0.5 * (a0(i, j) + a0(j, i));
  Mat<N> v = Mat<N>::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * (1.0 + std::abs(a(0, 0)))) break;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < N; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < N; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < N; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  // sort ascending
  std::array<int, N> order;
  for (int i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  SymEigen<N> out;
  for (int i = 0; i < N; ++i) {
    out.values[i] = a(order[i], order[i]);
    for (int k = 0; k < N; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

// Spectral 2-norm of a general matrix.
template <int N>
inline double operatorNorm(const Mat<N>& a) {
  const Mat<N> ata = a.transposed() * a;
  const auto e = symEigen(ata);
  return std::sqrt(std::max(0.0, e.values[N - 1]));
}

// Symmetric PSD square root.
template <int N>
inline Mat<N> symSqrt(const Mat<N>& a) {
  const auto e = symEigen(a);
  Mat<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0;
      for (int k = 0; k < N; ++k)
        s += e.vectors(i, k) * std::sqrt(std::max(0.0, e.values[k])) * e.vectors(j, k);
      r(i, j) = s;
    }
  return r;
}

template <int N>
struct Box {
  Vec<N> lo, hi;

  static Box empty() {
    Box b;
    for (int i = 0; i < N; ++i) {
      b.lo[i] = std::numeric_limits<double>::infinity();
      b.hi[i] = -std::numeric_limits<double>::infinity();
    }
    return b;
  }
  void expand(const Vec<N>& p) {
    for (int i = 0; i < N; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  double maxSide() const {
    double s = 0;
    for (int i = 0; i < N; ++i) s = std::max(s, hi[i] - lo[i]);
    return s;
  }
  double diameter() const {
    double s = 0;
    for (int i = 0; i < N; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }
  // support function of the box, sup over the box of p.d
  double support(const Vec<N>& d) const {
    double s = 0;
    for (int i = 0; i < N; ++i) s += std::max(lo[i] * d[i], hi[i] * d[i]);
    return s;
  }
};

using Box2 = Box<2>;
using Box3 = Box<3>;

inline constexpr double pi() { return 3.14159265358979323846; }

// Volume of the unit ball in R^n.
inline double unitBallVolume(int n) {
  if (n == 1) return 2.0;
  if (n == 2) return pi();
  if (n == 3) return 4.0 * pi() / 3.0;
  return std::pow(pi(), 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

template <int N>
inline std::ostream& operator<<(std::ostream& os, const Vec<N>& v) {
  os << "(";
  for (int i = 0; i < N; ++i) os << (i ? ", " : "") << v[i];
  return os << ")";
}

}  // namespace malab
