#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "covering.hpp"
#include "john.hpp"
#include "maximal.hpp"
#include "sections.hpp"

namespace malab {

// concentric shrinking of the domain; the standard interior windows are
// innerRegion(u, 0.5) and innerRegion(u, 0.75)
inline Body2 innerRegion(const PLConvexFunction& u, double tau) {
  return u.domain.dilated(u.domain.centroid(), tau);
}

// integral of |D2u| log^k(2 + |D2u|) over the region, node-sampled with
// dual-cell weights; nodes without a resolved Hessian are skipped
inline double llogkIntegral(const PLConvexFunction& u, const Body2& region, int k) {
  double sum = 0;
  for (int i = 0; i < u.nInterior; ++i) {
    if (!u.hessKnown[i] || !region.contains(u.nodes[i])) continue;
    const double g = hessNorm(u.hess[i]);
    sum += u.dualArea[i] * g * std::pow(std::log(2.0 + g), k);
  }
  return sum;
}

// The layer-cake rewrite of the tail integral: for the node-sampled field the
// identity
//   sum_{g_i >= cbar} w_i g_i log^{k+1}(g_i)
//     = log^{k+1}(cbar) G(cbar) + (k+1) int_cbar^inf log^k(t)/t G(t) dt,
// with G(t) = sum_{g_i >= t} w_i g_i piecewise constant, holds exactly; both
// sides are computed independently and compared.
struct LayerCake {
  int k = 0;
  double cbar = 2;
  double direct = 0;
  double fubini = 0;

  double agreement() const {
    const double scale = std::max({std::abs(direct), std::abs(fubini), 1e-300});
    return std::abs(direct - fubini) / scale;
  }
};

inline LayerCake layerCake(const PLConvexFunction& u, const Body2& region, int k, double cbar) {
  LayerCake lc;
  lc.k = k;
  lc.cbar = std::max(2.0, cbar);

  std::vector<std::pair<double, double>> tail;  // (g, w g) above the cut
  for (int i = 0; i < u.nInterior; ++i) {
    if (!u.hessKnown[i] || !region.contains(u.nodes[i])) continue;
    const double g = hessNorm(u.hess[i]);
    if (g < lc.cbar) continue;
    lc.direct += u.dualArea[i] * g * std::pow(std::log(g), k + 1);
    tail.emplace_back(g, u.dualArea[i] * g);
  }
  std::sort(tail.begin(), tail.end());

  double total = 0;
  for (const auto& [g, wg] : tail) total += wg;
  double G = total, prev = lc.cbar, integral = 0;
  for (const auto& [g, wg] : tail) {
    if (g > prev) {
      integral += G * (std::pow(std::log(g), k + 1) - std::pow(std::log(prev), k + 1)) / (k + 1);
      prev = g;
    }
    G -= wg;
  }
  lc.fubini = std::pow(std::log(lc.cbar), k + 1) * total + (k + 1) * integral;
  return lc;
}

struct MainReport {
  int k = 0;
  double cbar = 2;
  double lhs = 0;          // I_{k+1} over the half window
  double rhs = 0;          // I_k over the three-quarter window
  double ratio = 0;
  double boundedPart = 0;  // log^{k+1}(2+cbar) * int_{g<=cbar} g
  double tailPart = 0;     // 2^{k+1} * tail integral
  bool decompositionOk = false;
  LayerCake cake;
};

// Interior L log^k L gain: the higher integral over the half window against
// the lower one over the three-quarter window, plus the split at cbar
//   I_{k+1}(half) <= log^{k+1}(2+cbar) int_{g<=cbar} g + 2^{k+1} tail
// (valid pointwise once cbar >= 2) and the exact layer-cake cross-check.
inline MainReport verifyMain(const PLConvexFunction& u, int k, double cbar = 2.0) {
  MainReport r;
  r.k = k;
  r.cbar = std::max(2.0, cbar);
  const Body2 half = innerRegion(u, 0.5);
  r.lhs = llogkIntegral(u, half, k + 1);
  r.rhs = llogkIntegral(u, innerRegion(u, 0.75), k);
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : std::numeric_limits<double>::infinity();

  double below = 0;
  for (int i = 0; i < u.nInterior; ++i) {
    if (!u.hessKnown[i] || !half.contains(u.nodes[i])) continue;
    const double g = hessNorm(u.hess[i]);
    if (g < r.cbar) below += u.dualArea[i] * g;
  }
  r.boundedPart = std::pow(std::log(2.0 + r.cbar), k + 1) * below;
  r.cake = layerCake(u, half, k, r.cbar);
  r.tailPart = std::pow(2.0, k + 1) * r.cake.direct;
  r.decompositionOk = r.lhs <= r.boundedPart + r.tailPart + 1e-9 * (1.0 + r.lhs);
  return r;
}

struct LevelsetRung {
  double gamma = 0;
  double lhs = 0;  // |{M >= gamma}| inside the half window
  double rhs = 0;  // |{|D2u| >= C5 gamma}| inside the three-quarter window
};

struct ReplayRung {
  double gamma = 0;
  int picked = 0;
  double minFraction = 0;  // worst per-section share of {|D2u| >= C5 gamma}
  int fullOverlap = 0;     // max multiplicity of the picked full sections
  double assembled = 0;    // fullOverlap / minFraction, the replayed constant
  double direct = 0;       // lhs / rhs at this rung
  bool ok = false;
};

struct LevelsetsReport {
  double C4 = std::numeric_limits<double>::infinity();
  double C5 = 0;
  bool feasible = false;  // some C5 kept every rung's right side positive
  std::vector<LevelsetRung> rungs;
  std::vector<ReplayRung> replay;
  double eps2 = 0;
  double K = 0;  // overlap constant of the replayed covers
  bool replayOk = false;
};

// Distribution inequality |{M >= gamma}| <= C4 |{|D2u| >= C5 gamma}| swept
// over a dyadic gamma ladder (largest feasible C5, then the worst ratio as
// C4), then replayed on two middle rungs through an actual Vitali cover of
// {M >= gamma} at the witness heights: the covered mass is bounded by
// overlap / min-fraction times the right-hand measure, and the rung constant
// must not exceed that assembled one.
inline LevelsetsReport verifyLevelsets(const PLConvexFunction& u, const MaximalField& mf,
                                       double eps2 = 0.1) {
  if (mf.nodeIds.empty()) throw EmptySection("maximal field holds no nodes");
  LevelsetsReport rep;
  rep.eps2 = eps2;

  const Body2 outer = innerRegion(u, 0.75);
  std::vector<std::pair<double, double>> gField;  // (g, w) on the outer window
  double gMin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.nInterior; ++i) {
    if (!u.hessKnown[i] || !outer.contains(u.nodes[i])) continue;
    const double g = hessNorm(u.hess[i]);
    gField.emplace_back(g, u.dualArea[i]);
    gMin = std::min(gMin, g);
  }
  if (gField.empty()) throw EmptySection("no Hessian data inside the outer window");

  double gammaMax = 0;
  for (double m : mf.M) gammaMax = std::max(gammaMax, m);
  std::vector<double> ladder;
  for (double g = gammaMax; g >= gMin / 2 && ladder.size() < 40; g *= 0.5) ladder.push_back(g);
  if (ladder.empty()) ladder.push_back(gammaMax);

  auto lhsAt = [&](double gamma) {
    double s = 0;
    for (size_t i = 0; i < mf.nodeIds.size(); ++i)
      if (mf.M[i] >= gamma) s += u.dualArea[mf.nodeIds[i]];
    return s;
  };
  auto rhsAt = [&](double cut) {
    double s = 0;
    for (const auto& [g, w] : gField)
      if (g >= cut) s += w;
    return s;
  };

  for (double C5 : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    double worst = 0;
    bool ok = true;
    std::vector<LevelsetRung> rungs;
    for (double gamma : ladder) {
      LevelsetRung r;
      r.gamma = gamma;
      r.lhs = lhsAt(gamma);
      r.rhs = rhsAt(C5 * gamma);
      rungs.push_back(r);
      if (r.lhs <= 0) continue;
      if (r.rhs <= 0) {
        ok = false;
        break;
      }
      worst = std::max(worst, r.lhs / r.rhs);
    }
    if (ok) {
      rep.feasible = true;
      rep.C5 = C5;
      rep.C4 = worst;
      rep.rungs = std::move(rungs);
      break;
    }
    if (C5 == 0.03125) rep.rungs = std::move(rungs);  // keep the last attempt visible
  }
  if (!rep.feasible) return rep;

  // replay two interior rungs of the ladder
  const int J = static_cast<int>(ladder.size());
  std::vector<int> replayIdx{J / 3, (2 * J) / 3};
  replayIdx.erase(std::unique(replayIdx.begin(), replayIdx.end()), replayIdx.end());
  rep.replayOk = true;
  for (int ri : replayIdx) {
    const double gamma = ladder[ri];
    std::vector<CoverCandidate> cands;
    for (size_t i = 0; i < mf.nodeIds.size(); ++i)
      if (mf.M[i] >= gamma) cands.push_back({mf.nodeIds[i], mf.bestT[i]});
    if (cands.empty()) continue;
    const CoverResult cov = cover(u, cands, eps2);

    ReplayRung rr;
    rr.gamma = gamma;
    rr.picked = static_cast<int>(cov.sections.size());
    rr.minFraction = std::numeric_limits<double>::infinity();
    for (const Section& s : cov.sections) {
      double num = 0, den = 0;
      for (int z : s.nodes) {
        if (!u.isInterior(z)) continue;
        den += u.dualArea[z];
        if (u.hessKnown[z] && hessNorm(u.hess[z]) >= rep.C5 * gamma) num += u.dualArea[z];
      }
      rr.minFraction = std::min(rr.minFraction, den > 0 ? num / den : 0.0);
    }
    // multiplicity of the full (unshrunk) picked sections, on the exact
    // sublevel inequality
    for (int z = 0; z < u.nInterior; ++z) {
      int count = 0;
      for (const Section& s : cov.sections)
        if (u.values[z] <= u.values[s.centerId] + dot(s.p, u.nodes[z] - s.x) + s.t + 1e-14)
          ++count;
      rr.fullOverlap = std::max(rr.fullOverlap, count);
    }
    rr.assembled = rr.minFraction > 0 ? rr.fullOverlap / rr.minFraction
                                      : std::numeric_limits<double>::infinity();
    rr.direct = lhsAt(gamma) / std::max(rhsAt(rep.C5 * gamma), 1e-300);
    rr.ok = rr.minFraction > 0 && rr.direct <= rr.assembled * (1.0 + 1e-9);
    rep.replayOk = rep.replayOk && rr.ok;
    rep.K = std::max(rep.K, rr.fullOverlap / std::abs(std::log(eps2)));
    rep.replay.push_back(rr);
  }
  if (rep.replay.empty()) rep.replayOk = false;
  return rep;
}

struct MaximalIneqRung {
  double alpha = 0;
  double lhs = 0;      // int_{|D2u| >= alpha, half window} |D2u|
  double measure = 0;  // |{M >= Cdd alpha}|
  double ratio = 0;    // lhs / (alpha * measure)
};

struct MaximalIneqReport {
  double Cdd = 0.5;
  double Cprime = 0;
  double alpha0 = 0;
  std::vector<MaximalIneqRung> rungs;  // ascending alpha
  bool ok = false;
};

// Truncated strong-type bound int_{{|D2u|>=alpha}} |D2u| <= C' alpha
// |{M >= C'' alpha}| with C'' fixed at 1/2: alpha0 is the smallest dyadic
// rung beyond which the right side stays positive whenever the left one is,
// and C' the worst ratio from there up.
inline MaximalIneqReport verifyMaximalIneq(const PLConvexFunction& u, const MaximalField& mf,
                                           double Cdd = 0.5) {
  if (mf.nodeIds.empty()) throw EmptySection("maximal field holds no nodes");
  MaximalIneqReport rep;
  rep.Cdd = Cdd;

  const Body2 half = innerRegion(u, 0.5);
  std::vector<std::pair<double, double>> gField;
  double gMin = std::numeric_limits<double>::infinity(), gMax = 0;
  for (int i = 0; i < u.nInterior; ++i) {
    if (!u.hessKnown[i] || !half.contains(u.nodes[i])) continue;
    const double g = hessNorm(u.hess[i]);
    gField.emplace_back(g, u.dualArea[i]);
    gMin = std::min(gMin, g);
    gMax = std::max(gMax, g);
  }
  if (gField.empty()) throw EmptySection("no Hessian data inside the half window");

  std::vector<double> ladder;
  for (double a = gMax; a >= gMin / 2 && ladder.size() < 40; a *= 0.5) ladder.push_back(a);
  std::sort(ladder.begin(), ladder.end());

  for (double alpha : ladder) {
    MaximalIneqRung r;
    r.alpha = alpha;
    for (const auto& [g, w] : gField)
      if (g >= alpha) r.lhs += w * g;
    for (size_t i = 0; i < mf.nodeIds.size(); ++i)
      if (mf.M[i] >= Cdd * alpha) r.measure += u.dualArea[mf.nodeIds[i]];
    r.ratio = r.measure > 0 ? r.lhs / (alpha * r.measure)
                            : (r.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.rungs.push_back(r);
  }

  // smallest rung whose whole upper tail keeps the measure positive
  int start = -1;
  bool tailOk = true;
  for (int i = static_cast<int>(rep.rungs.size()) - 1; i >= 0; --i) {
    const auto& r = rep.rungs[i];
    if (r.lhs > 0 && r.measure <= 0) tailOk = false;
    if (tailOk) start = i;
  }
  if (start >= 0) {
    rep.ok = true;
    rep.alpha0 = rep.rungs[start].alpha;
    for (size_t i = start; i < rep.rungs.size(); ++i)
      rep.Cprime = std::max(rep.Cprime, rep.rungs[i].ratio);
  }
  return rep;
}

struct RegPiece {
  int centerId = -1;
  double t = 0;
  double r1 = 0, r2 = 0;      // inradius / circumradius about the map center
  double normT = 0, detT = 0;
  double size = 0;            // |T| |T*| / det T
  double factor = 0;          // size / det T * log(2 + size)
  double lhs = 0, rhs = 0;    // renormalized I_{k+1} / I_k over the piece
  double ratio = 0;
};

struct RegReport {
  int k = 0;
  double rho = 0, eps0 = 0;
  int N = 0;
  double r1 = std::numeric_limits<double>::infinity();  // family worst inradius
  double r2 = 0;                                        // family worst circumradius
  std::vector<RegPiece> pieces;
  double assembled = 0;   // sum of the per-piece factors
  double IkInner = 0;     // I_k over the half window
  double sumPieces = 0;   // sum over pieces of int_S g log^k(2+g)
  bool coverDominates = false;
};

// Reduction to normalized pieces: cover the half window by sections at the
// safe height, renormalize each, and check the shape bounds |T| <= n/r1 and
// det T >= 1/r2^n that let one constant serve every piece; per piece the
// interior gain is re-measured in normalized variables through the change of
// variables D2v(Tz) = det T A^-T D2u A^-1, and the covered integrals must
// dominate I_k over the window.
inline RegReport verifyRegReduction(const PLConvexFunction& u, int k, double rho,
                                    double eps0 = 0.1) {
  RegReport rep;
  rep.k = k;
  rep.rho = rho;
  rep.eps0 = eps0;

  const Body2 half = innerRegion(u, 0.5);
  std::vector<CoverCandidate> cands;
  for (int i = 0; i < u.nInterior; ++i)
    if (half.contains(u.nodes[i])) cands.push_back({i, rho});
  if (cands.empty()) throw EmptySection("no interior nodes inside the half window");
  const CoverResult cov = cover(u, cands, eps0);
  rep.N = static_cast<int>(cov.sections.size());

  for (const Section& s : cov.sections) {
    RegPiece pc;
    pc.centerId = s.centerId;
    pc.t = s.t;
    const Map2 T = johnNormalize<2>(s.body());
    const Vec2 c0 = T.applyInverse(vec2(0, 0));
    pc.r1 = polygonInradiusAt(s.hull, c0);
    pc.r2 = polygonCircumradiusAt(s.hull, c0);
    pc.normT = T.normA;
    pc.detT = T.detA;
    pc.size = T.normalizationSize();
    if (pc.normT * pc.r1 > 2.0 * (1.0 + 1e-5))
      throw ShapeDegeneracy("norm bound |T| <= n/r1 fails at node " +
                            std::to_string(s.centerId));
    if (pc.detT * pc.r2 * pc.r2 < 1.0 - 1e-5)
      throw ShapeDegeneracy("det bound det T >= 1/r2^n fails at node " +
                            std::to_string(s.centerId));
    pc.factor = pc.size / pc.detT * std::log(2.0 + pc.size);

    // renormalized interior gain on the piece, via change of variables
    const Mat2 AinvT = T.Ainv.transposed();
    const Polygon innerHull = polygonDilate(s.hull, c0, 0.5);
    const Polygon outerHull = polygonDilate(s.hull, c0, 0.75);
    double pieceIk = 0;
    for (int z : s.nodes) {
      if (!u.isInterior(z) || !u.hessKnown[z]) continue;
      const double gv = hessNorm((AinvT * u.hess[z] * T.Ainv) * T.detA);
      const double wz = u.dualArea[z] * T.detA;  // dz = det T dy
      const double g = hessNorm(u.hess[z]);
      pieceIk += u.dualArea[z] * g * std::pow(std::log(2.0 + g), k);
      if (polygonContains(innerHull, u.nodes[z], 1e-12))
        pc.lhs += wz * gv * std::pow(std::log(2.0 + gv), k + 1);
      if (polygonContains(outerHull, u.nodes[z], 1e-12))
        pc.rhs += wz * gv * std::pow(std::log(2.0 + gv), k);
    }
    pc.ratio = pc.rhs > 0 ? pc.lhs / pc.rhs : std::numeric_limits<double>::infinity();
    rep.sumPieces += pieceIk;
    rep.assembled += pc.factor;
    rep.r1 = std::min(rep.r1, pc.r1);
    rep.r2 = std::max(rep.r2, pc.r2);
    rep.pieces.push_back(pc);
  }

  rep.IkInner = llogkIntegral(u, half, k);
  rep.coverDominates = rep.sumPieces >= rep.IkInner * (1.0 - 1e-9);
  return rep;
}

}  // namespace malab
