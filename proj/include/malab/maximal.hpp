#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "parallel.hpp"
#include "sections.hpp"

namespace malab {

// The section maximal operator sampled on a dyadic height ladder: per node,
// the largest average of |D2u| over S(x,t) for t in {rho, rho/2, ...}, the
// descent stopping once a section holds fewer than minNodes nodes.
struct MaximalField {
  std::vector<int> nodeIds;    // nodes where M is defined
  std::vector<double> M;
  std::vector<double> bestT;   // rung achieving the supremum (witness height)
  std::vector<char> flagged;   // some rung skipped for lack of Hessian data
  int skippedRungs = 0;
};

inline MaximalField maximalField(const PLConvexFunction& u, const Body2& inner, double rho,
                                 int minNodes = 5) {
  std::vector<int> centers;
  for (int i = 0; i < u.nInterior; ++i)
    if (inner.contains(u.nodes[i])) centers.push_back(i);

  const int m = static_cast<int>(centers.size());
  std::vector<double> M(m, -1), bestT(m, 0);
  std::vector<char> flagged(m, 0);
  std::vector<int> skipped(m, 0);

  parallelFor(m, [&](int c) {
    const int id = centers[c];
    for (double t = rho; t >= u.grid.h * u.grid.h * 1e-3; t *= 0.5) {
      const Section s = section(u, id, t, false);
      int known = 0, total = 0;
      double sum = 0;
      for (int z : s.nodes) {
        if (!u.isInterior(z)) continue;
        ++total;
        if (!u.hessKnown[z]) continue;
        ++known;
        sum += hessNorm(u.hess[z]);
      }
      if (known == 0) {
        flagged[c] = 1;  // rung captured no Hessian data: skip, keep going
        ++skipped[c];
      } else {
        const double avg = sum / known;
        if (avg > M[c]) {
          M[c] = avg;
          bestT[c] = t;
        }
      }
      if (total < minNodes) break;  // ladder bottomed out at grid scale
    }
  });

  MaximalField out;
  for (int c = 0; c < m; ++c) {
    if (M[c] < 0) continue;  // no rung produced data; node dropped
    out.nodeIds.push_back(centers[c]);
    out.M.push_back(M[c]);
    out.bestT.push_back(bestT[c]);
    out.flagged.push_back(flagged[c]);
    out.skippedRungs += skipped[c];
  }
  return out;
}

}  // namespace malab
