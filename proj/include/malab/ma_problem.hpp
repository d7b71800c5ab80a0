#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "convex_body.hpp"
#include "errors.hpp"
#include "grid_function.hpp"
#include "rng.hpp"

namespace malab {

// Density field specification. "const" is f = lambda everywhere (Lambda kept
// equal); "random" draws lambda-or-Lambda independently per dual cell from
// the seed; "checker" alternates them over 8h x 8h blocks.
struct DensitySpec {
  enum class Kind { Const, Random, Checker };
  Kind kind = Kind::Const;
  double lambda = 1.0;
  double Lambda = 1.0;
  std::uint64_t seed = 0;

  static Kind kindFromName(const std::string& name) {
    if (name == "const") return Kind::Const;
    if (name == "random") return Kind::Random;
    if (name == "checker") return Kind::Checker;
    throw UnknownName("density kind '" + name + "'");
  }
  const char* kindName() const {
    switch (kind) {
      case Kind::Const: return "const";
      case Kind::Random: return "random";
      default: return "checker";
    }
  }
};

// A Monge-Ampere problem materialized on a grid: the domain discretization,
// the density per dual cell, and the target measure per interior node.
struct MAProblem {
  PLConvexFunction grid;  // values untouched; carries nodes + dual areas
  DensitySpec spec;
  std::vector<double> f;   // per interior node (piecewise constant per dual cell)
  std::vector<double> mu;  // f * dual cell area

  double totalMass() const {
    double s = 0;
    for (double m : mu) s += m;
    return s;
  }
};

inline MAProblem makeProblem(const Body2& domain, const DensitySpec& spec, double h) {
  if (!(spec.lambda > 0) || !(spec.Lambda >= spec.lambda))
    throw InfeasibleMass("need 0 < lambda <= Lambda");
  MAProblem p;
  p.spec = spec;
  p.grid = buildGrid(domain, h);
  const int nI = p.grid.nInterior;
  p.f.assign(nI, spec.lambda);
  if (spec.kind == DensitySpec::Kind::Random) {
    Rng rng(spec.seed);
    for (int i = 0; i < nI; ++i) p.f[i] = rng.coin() ? spec.lambda : spec.Lambda;
  } else if (spec.kind == DensitySpec::Kind::Checker) {
    for (int i = 0; i < nI; ++i) {
      const Vec2 x = p.grid.nodes[i];
      const long long bi = static_cast<long long>(std::floor(x[0] / (8 * h)));
      const long long bj = static_cast<long long>(std::floor(x[1] / (8 * h)));
      p.f[i] = ((bi + bj) & 1) ? spec.Lambda : spec.lambda;
    }
  }
  p.mu.assign(nI, 0.0);
  double total = 0;
  for (int i = 0; i < nI; ++i) {
    p.mu[i] = p.f[i] * p.grid.dualArea[i];
    total += p.mu[i];
  }
  if (!(total > 0)) throw InfeasibleMass("target measure has zero total mass");
  return p;
}

}  // namespace malab
