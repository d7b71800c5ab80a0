#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "hull3.hpp"
#include "polygon.hpp"

namespace malab {

struct EnvelopeResult {
  std::vector<double> gamma;  // envelope value at each input point
  std::vector<char> contact;  // w - gamma <= tol
  double tol = 0;
  int contactCount = 0;
};

// Convex envelope of the point values w with the zero obstacle on the region
// boundary: the sup of affine functions below w inside and below 0 on the
// boundary polygon. Computed as the lower hull of the lifted cloud
// {(p_i, w_i)} united with the densified boundary at height zero; the value
// at a query point is the max over downward hull faces of their planes
// (every face plane supports the hull from below).
inline EnvelopeResult convexEnvelope(const std::vector<Vec2>& pts, const std::vector<double>& w,
                                     const Polygon& boundary, double spacing) {
  const int n = static_cast<int>(pts.size());
  EnvelopeResult res;
  res.gamma.resize(n);
  res.contact.assign(n, 0);

  std::vector<Vec3> cloud;
  cloud.reserve(pts.size() + 4 * boundary.size());
  for (int i = 0; i < n; ++i) cloud.push_back(vec3(pts[i][0], pts[i][1], w[i]));
  const int m = static_cast<int>(boundary.size());
  for (int i = 0; i < m; ++i) {
    const Vec2 a = boundary[i], b = boundary[(i + 1) % m];
    const int steps = std::max(1, static_cast<int>(std::ceil(norm(b - a) / spacing)));
    for (int s = 0; s < steps; ++s) {
      const Vec2 q = a + (b - a) * (static_cast<double>(s) / steps);
      cloud.push_back(vec3(q[0], q[1], 0.0));
    }
  }

  // condition the hull by mapping the cloud into the unit cube
  Box<3> bb = Box<3>::empty();
  for (const auto& c : cloud) bb.expand(c);
  const Vec3 span = bb.hi - bb.lo;
  double osc = span[2];
  for (int i = 0; i < n; ++i) osc = std::max(osc, std::abs(w[i]));
  res.tol = 1e-6 * std::max(osc, 1e-300);

  if (span[2] <= 1e-14 * std::max({span[0], span[1], 1e-300})) {
    // flat cloud: the envelope is the data itself
    res.gamma = w;
    for (int i = 0; i < n; ++i) res.contact[i] = 1;
    res.contactCount = n;
    return res;
  }

  auto scale = [&](const Vec3& p) {
    return vec3((p[0] - bb.lo[0]) / span[0], (p[1] - bb.lo[1]) / span[1],
                (p[2] - bb.lo[2]) / span[2]);
  };
  std::vector<Vec3> scaled(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) scaled[i] = scale(cloud[i]);

  std::vector<std::array<double, 4>> lower;  // downward planes z = a x + b y + c
  try {
    const Hull3 hull = convexHull3(scaled);
    for (const auto& f : hull.faces) {
      if (f.n[2] >= -1e-12) continue;
      lower.push_back({-f.n[0] / f.n[2], -f.n[1] / f.n[2], f.off / f.n[2], 0.0});
    }
  } catch (const DegenerateBody&) {
    // coplanar lift: the data is affine, hence its own envelope
    res.gamma = w;
    for (int i = 0; i < n; ++i) res.contact[i] = 1;
    res.contactCount = n;
    return res;
  }

  for (int i = 0; i < n; ++i) {
    const Vec3 q = scaled[i];
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& pl : lower) g = std::max(g, pl[0] * q[0] + pl[1] * q[1] + pl[2]);
    double val = g * span[2] + bb.lo[2];
    val = std::min(val, w[i]);  // clamp roundoff overshoot: gamma <= w
    res.gamma[i] = val;
    if (w[i] - val <= res.tol) {
      res.contact[i] = 1;
      ++res.contactCount;
    }
  }
  return res;
}

}  // namespace malab
