#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "envelope.hpp"
#include "normalized.hpp"
#include "sections.hpp"

namespace malab {

// mean of |D2u| over the section's interior nodes with known Hessians;
// negative when no data
inline double sectionHessAverage(const PLConvexFunction& u, const Section& s) {
  double sum = 0;
  int cnt = 0;
  for (int z : s.nodes) {
    if (!u.isInterior(z) || !u.hessKnown[z]) continue;
    sum += hessNorm(u.hess[z]);
    ++cnt;
  }
  return cnt ? sum / cnt : -1.0;
}

struct HessmeanSample {
  int centerId = -1;
  double t = 0;
  double size = 0;     // |T| |T*| / (det T)^(2/n)
  double avg = 0;      // mean of |D2u| over S(x,t)
  double ratio = 0;    // size / avg, lower-bounded by the measured C1
  double gradSup = 0;  // sup over section nodes of |grad v|
};

struct HessmeanReport {
  std::vector<HessmeanSample> samples;
  double C1 = std::numeric_limits<double>::infinity();  // inf of the ratios
  double cGrad = 0;                                     // max of the grad sups
  int skipped = 0;

  void account(const HessmeanSample& s) {
    samples.push_back(s);
    C1 = std::min(C1, s.ratio);
    cGrad = std::max(cGrad, s.gradSup);
  }
};

// Lemma comparison "normalization size >= C1 * section average of |D2u|":
// measure the worst ratio over the sampled sections, plus the gradient
// sub-check sup |grad v| <= c'' with grad v = (det T)^(2/n) A^-T (grad u - p).
inline HessmeanReport verifyHessmean(const PLConvexFunction& u, const std::vector<int>& centers,
                                     const std::vector<double>& heights) {
  HessmeanReport rep;
  for (int id : centers) {
    for (double t : heights) {
      HessmeanSample smp;
      smp.centerId = id;
      smp.t = t;
      try {
        const Section s = section(u, id, t);
        smp.avg = sectionHessAverage(u, s);
        if (smp.avg <= 0 || s.hull.size() < 3) {
          ++rep.skipped;
          continue;
        }
        const Map2 T = johnNormalize<2>(s.body());
        smp.size = T.normalizationSize();
        smp.ratio = smp.size / smp.avg;
        const double scale = T.detA;  // (det T)^(2/n), n = 2
        const Mat2 AinvT = T.Ainv.transposed();
        for (int z : s.nodes) {
          if (!u.isInterior(z)) continue;
          smp.gradSup = std::max(smp.gradSup, scale * norm(AinvT * (u.grad[z] - u.grad[id])));
        }
        rep.account(smp);
      } catch (const EscapesDomain&) {
        ++rep.skipped;
      } catch (const DegenerateBody&) {
        ++rep.skipped;
      }
    }
  }
  return rep;
}

struct SupermeanSample {
  int centerId = -1;
  double t = 0;
  double c1 = 0;                 // paraboloid constant used
  double infZ = 0;
  double contactMeasure = 0;     // |E| inside Z
  double chainLhs = 0;           // (c1/2)^n
  double chainRhs = 0;           // C(n) Lambda |E|
  std::vector<double> fraction;  // |A meet S(x,(1-eps)t)| / |S(x,t)| per eps
  double floorRatio = 0;         // min_A |D2u| / normalization size
  bool hessResolved = false;
  double vFloor = 0;             // min directional second difference on E
  double envConvexity = 0;       // most negative second difference of Gamma
  double envDomination = 0;      // min of (d2 w - d2 Gamma) at contact nodes
  int cellsAcross = 0;
};

struct SupermeanReport {
  std::vector<SupermeanSample> samples;
  std::vector<double> epsGrid;
  double C2 = std::numeric_limits<double>::infinity();  // inf fraction at eps = 0
  double C3 = std::numeric_limits<double>::infinity();  // inf floor ratio
  double eps1 = 0;    // largest eps keeping the fraction >= C2 / 2
  double c1Used = 0;  // paraboloid constant (min |inf Z v| when automatic)
  int skipped = 0;
};

// Contact-set lemma: subtract the paraboloid p(z) = c1 (|z|^2/n^2 - 1)/2 from
// v, take the convex envelope with the zero obstacle on del Z, and measure
// the contact set E and its pull-back A = T^-1(E). Verifies the measure
// chain (c1/2)^n <= C(n) Lambda |E| with C(n) = (2n)^n / omega_n, and (when
// the v-grid resolves it) the Hessian floor D2v >= c1/n^2 on E through
// centered second differences with the pinned tolerance c1/(2 n^2).
inline SupermeanReport verifyHesssupermean(const PLConvexFunction& u,
                                           const std::vector<int>& centers,
                                           const std::vector<double>& heights,
                                           const std::vector<double>& epsGrid, double Lambda,
                                           double c1Override = 0) {
  SupermeanReport rep;
  rep.epsGrid = epsGrid;

  std::vector<NormalizedSolution> normals;
  std::vector<std::pair<int, double>> keys;
  double c1Auto = std::numeric_limits<double>::infinity();
  for (int id : centers) {
    for (double t : heights) {
      try {
        NormalizedSolution ns = normalizeSection(u, id, t);
        c1Auto = std::min(c1Auto, -ns.infZ);
        normals.push_back(std::move(ns));
        keys.emplace_back(id, t);
      } catch (const EscapesDomain&) {
        ++rep.skipped;
      } catch (const DegenerateBody&) {
        ++rep.skipped;
      }
    }
  }
  if (normals.empty()) throw EmptyContactSet("no section could be normalized");
  rep.c1Used = c1Override > 0 ? c1Override : c1Auto;

  const double Cn = 16.0 / pi();  // (2n)^n / omega_n at n = 2
  std::vector<double> worstFraction(epsGrid.size(), std::numeric_limits<double>::infinity());

  for (size_t si = 0; si < normals.size(); ++si) {
    const NormalizedSolution& ns = normals[si];
    SupermeanSample smp;
    smp.centerId = keys[si].first;
    smp.t = keys[si].second;
    smp.c1 = rep.c1Used;
    smp.infZ = ns.infZ;
    smp.cellsAcross = ns.cellsAcross;

    // w = v - p on the nodes inside Z
    std::vector<Vec2> pts;
    std::vector<double> w;
    std::vector<int> nodeOf;  // v-grid ids behind pts
    for (size_t i = 0; i < ns.v.nodes.size(); ++i) {
      const Vec2 z = ns.v.nodes[i];
      if (!ns.insideZ(z)) continue;
      pts.push_back(z);
      w.push_back(ns.v.values[i] - smp.c1 * (sqnorm(z) / 4.0 - 1.0) / 2.0);
      nodeOf.push_back(static_cast<int>(i));
    }
    if (pts.empty()) throw EmptyContactSet("section interior resolved no nodes");
    const auto env = convexEnvelope(pts, w, ns.Z, ns.v.grid.h);
    if (env.contactCount == 0)
      throw EmptyContactSet("contact set empty at node " + std::to_string(smp.centerId));

    // measure of E and of the pull-back fraction per eps
    const Vec2 x = u.nodes[smp.centerId];
    const Vec2 p = u.grad[smp.centerId];
    const double base = u.values[smp.centerId];
    const double secArea = polygonArea(ns.Z) / ns.T.detA;
    std::vector<double> inter(epsGrid.size(), 0.0);
    for (size_t j = 0; j < pts.size(); ++j) {
      if (!env.contact[j]) continue;
      const int vid = nodeOf[j];
      if (!ns.v.isInterior(vid)) continue;
      const double cellZ = ns.v.dualArea[vid];
      smp.contactMeasure += cellZ;
      const Vec2 y = ns.T.applyInverse(pts[j]);
      double excess = std::numeric_limits<double>::infinity();
      try {
        excess = u.interpolate(y) - base - dot(p, y - x);
      } catch (const BoundaryStencil&) {
      }
      for (size_t e = 0; e < epsGrid.size(); ++e)
        if (excess <= (1.0 - epsGrid[e]) * smp.t + 1e-14) inter[e] += cellZ / ns.T.detA;
    }
    smp.chainLhs = std::pow(smp.c1 / 2.0, 2.0);
    smp.chainRhs = Cn * Lambda * smp.contactMeasure;
    for (size_t e = 0; e < epsGrid.size(); ++e) {
      smp.fraction.push_back(inter[e] / secArea);
      worstFraction[e] = std::min(worstFraction[e], smp.fraction.back());
    }

    // Hessian floor on A through the original field
    double floorHess = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < pts.size(); ++j) {
      if (!env.contact[j]) continue;
      const Vec2 y = ns.T.applyInverse(pts[j]);
      const int near = u.grid.idAt(static_cast<int>(std::lround(y[0] / u.grid.h)),
                                   static_cast<int>(std::lround(y[1] / u.grid.h)));
      if (near < 0 || !u.isInterior(near) || !u.hessKnown[near]) continue;
      floorHess = std::min(floorHess, hessNorm(u.hess[near]));
    }
    const double size = ns.T.normalizationSize();
    smp.floorRatio = std::isfinite(floorHess) ? floorHess / size : 0.0;

    // second-difference floor for D2v on E, when the v-grid resolves it
    smp.hessResolved = ns.cellsAcross >= 7;
    if (smp.hessResolved) {
      const double hv = ns.v.grid.h;
      double vfloor = std::numeric_limits<double>::infinity();
      double envConv = std::numeric_limits<double>::infinity();
      double envDom = std::numeric_limits<double>::infinity();
      std::vector<int> ptOf(ns.v.nodes.size(), -1);
      for (size_t j = 0; j < pts.size(); ++j) ptOf[nodeOf[j]] = static_cast<int>(j);
      const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
      for (size_t j = 0; j < pts.size(); ++j) {
        if (!env.contact[j]) continue;
        const Vec2 z = pts[j];
        const int zi = static_cast<int>(std::lround(z[0] / hv));
        const int zj = static_cast<int>(std::lround(z[1] / hv));
        for (const auto& d : dirs) {
          const int aId = ns.v.grid.idAt(zi + d[0], zj + d[1]);
          const int bId = ns.v.grid.idAt(zi - d[0], zj - d[1]);
          if (aId < 0 || bId < 0) continue;
          const double len2 = (d[0] * d[0] + d[1] * d[1]) * hv * hv;
          const int cId = nodeOf[j];
          const double dv =
              (ns.v.values[aId] - 2 * ns.v.values[cId] + ns.v.values[bId]) / len2;
          vfloor = std::min(vfloor, dv);
          const int pa = ptOf[aId], pb = ptOf[bId];
          if (pa >= 0 && pb >= 0) {
            const double dg = (env.gamma[pa] - 2 * env.gamma[j] + env.gamma[pb]) / len2;
            const double dw = (w[pa] - 2 * w[j] + w[pb]) / len2;
            envConv = std::min(envConv, dg);
            envDom = std::min(envDom, dw - dg);
          }
        }
      }
      smp.vFloor = std::isfinite(vfloor) ? vfloor : 0.0;
      smp.envConvexity = std::isfinite(envConv) ? envConv : 0.0;
      smp.envDomination = std::isfinite(envDom) ? envDom : 0.0;
    }

    rep.C3 = std::min(rep.C3, smp.floorRatio);
    rep.samples.push_back(std::move(smp));
  }

  rep.C2 = worstFraction.empty() ? 0.0 : worstFraction[0];
  for (size_t e = 0; e < epsGrid.size(); ++e)
    if (worstFraction[e] >= rep.C2 / 2.0) rep.eps1 = std::max(rep.eps1, epsGrid[e]);
  return rep;
}

}  // namespace malab
