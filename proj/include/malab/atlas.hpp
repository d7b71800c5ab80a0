#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "sections.hpp"

namespace malab {

// Geometric constants of the section structure for a nested pair of regions:
// the safe height rho, the dilation sandwich beta(tau), the engulfing
// constant theta, and the covering thresholds.
struct SectionAtlas {
  double rho = 0;
  std::vector<std::pair<double, double>> beta;  // (tau, measured beta(tau))
  double theta = 1;
  double eps0 = 0.1;  // greedy covering threshold
  double eps1 = 0;    // contact-set threshold, measured downstream
  double eps2 = 0;    // min(eps0, eps1) once eps1 is known
  double K = 0;       // overlap constant at eps0

  double betaAt(double tau) const {
    for (const auto& [a, b] : beta)
      if (a == tau) return b;
    throw UnknownName("beta not measured at tau = " + std::to_string(tau));
  }
};

// Largest dyadic height rho = 2^k with S(x, 2*rho) inside `outer` for every
// interior node x in `inner`. Containment is checked on the section hull with
// half-a-cell slack (the node-hull resolution); sections reaching the domain
// boundary fail outright.
inline double safeHeight(const PLConvexFunction& u, const Body2& inner, const Body2& outer) {
  const double diam = outer.bounds().diameter();
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& v : inner.vertices) gap = std::min(gap, outer.facetClearance(v));
  if (!(gap > 1e-12 * diam))
    throw NoPositiveHeight("inner region leaves no room inside the outer one");

  std::vector<int> centers;
  for (int i = 0; i < u.nInterior; ++i)
    if (inner.contains(u.nodes[i])) centers.push_back(i);
  if (centers.empty()) throw NoPositiveHeight("no grid nodes inside the inner region");

  const double slack = 0.5 * u.grid.h;
  auto safe = [&](double t) {
    for (int id : centers) {
      const Section s = section(u, id, 2.0 * t, false);
      if (s.touchesBoundary) return false;
      for (const auto& v : s.hull)
        if (outer.membershipGap(v) > slack * 1.000001) return false;
    }
    return true;
  };

  const double tMin = u.grid.h * u.grid.h;  // smallest grid-resolvable height
  double t = std::exp2(std::ceil(std::log2(std::max(u.oscillation(), tMin))));
  while (t >= tMin && !safe(t)) t *= 0.5;
  if (t < tMin)
    throw NoPositiveHeight("even height " + std::to_string(2 * tMin) +
                           " escapes the outer region");
  return t;
}

struct EngulfingReport {
  std::vector<std::pair<double, double>> beta;  // largest needed beta per tau
  double theta = 1;                             // largest needed engulfing factor
  int triples = 0;                              // (x, t, tau) inclusion samples
  int pairs = 0;                                // intersecting pairs measured
  int degenerate = 0;                           // sub-resolution sections skipped

  double betaAt(double tau) const {
    for (const auto& [a, b] : beta)
      if (a == tau) return b;
    throw UnknownName("beta not measured at tau = " + std::to_string(tau));
  }
};

// Check tau S(x,t) inside S(x,tau t) on every sample and measure the smallest
// sandwich constants: beta(tau) with S(x,tau t) inside beta S(x,t), and theta
// with S(y,t) inside S(x,theta t) over intersecting equal-height pairs.
// Inclusions get one grid cell of slack (the hull resolution); anything worse
// is a genuine geometry bug and throws.
inline EngulfingReport verifyEngulfing(const PLConvexFunction& u, double rho,
                                       const std::vector<int>& centers,
                                       const std::vector<double>& taus = {0.25, 0.5, 0.75},
                                       std::vector<double> ladder = {},
                                       double tPairArg = 0) {
  EngulfingReport rep;
  for (double tau : taus) rep.beta.emplace_back(tau, tau);
  const double slack = 1.5 * u.grid.h;

  std::vector<Section> atTheta;  // equal-height family for the pair scan
  // default pair height: small enough to keep theta * t in the safe band, but
  // never below the lattice-resolvable height 2h^2 (section radius 2h), or
  // coarse grids produce single-node sections that can never intersect
  const double hh = u.grid.h * u.grid.h;
  const double tPair = tPairArg > 0 ? tPairArg : std::max(rho / 8, 2 * hh);
  if (ladder.empty()) ladder = {2 * rho, rho, rho / 2, rho / 4};

  for (int id : centers) {
    for (double t : ladder) {
      Section s = section(u, id, t, false);
      if (s.touchesBoundary || s.hull.size() < 3) {
        ++rep.degenerate;
        continue;
      }
      for (size_t k = 0; k < rep.beta.size(); ++k) {
        const double tau = rep.beta[k].first;
        Section st = section(u, id, tau * t, false);
        if (st.hull.size() < 3) {
          ++rep.degenerate;
          continue;
        }
        ++rep.triples;
        const Body2 target = st.body();
        for (const auto& v : dilate(s, tau)) {
          const double g = target.membershipGap(v);
          if (g > slack)
            throw InclusionViolation(
                "tau S(x,t) leaves S(x,tau t) by " + std::to_string(g) + " at node " +
                std::to_string(id) + ", t = " + std::to_string(t) + ", tau = " +
                std::to_string(tau));
        }
        // smallest beta with S(x, tau t) inside beta S(x, t)
        double need = rep.beta[k].second;
        for (int z : st.nodes)
          need = std::max(need, polygonGauge(s.hull, s.x, u.nodes[z]));
        rep.beta[k].second = need;
      }
    }
    Section sp = section(u, id, tPair, false);
    if (!sp.touchesBoundary && !sp.nodes.empty()) atTheta.push_back(std::move(sp));
  }

  // engulfing across intersecting pairs: theta is read off directly as the
  // worst excess of S(y,t) nodes over the supporting plane at x
  for (size_t a = 0; a < atTheta.size(); ++a) {
    for (size_t b = 0; b < atTheta.size(); ++b) {
      if (a == b) continue;
      const Section& sx = atTheta[a];
      const Section& sy = atTheta[b];
      bool meet = false;
      for (int z : sy.nodes)
        if (sx.containsNode(u, z)) {
          meet = true;
          break;
        }
      if (!meet) continue;
      ++rep.pairs;
      const double base = u.values[sx.centerId];
      for (int z : sy.nodes) {
        const double excess = u.values[z] - base - dot(sx.p, u.nodes[z] - sx.x);
        rep.theta = std::max(rep.theta, excess / sx.t);
      }
    }
  }
  return rep;
}

}  // namespace malab
