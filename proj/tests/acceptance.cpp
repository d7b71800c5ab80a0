// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Everything here is pinned; a failure means the lab regressed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "malab/experiment.hpp"

using namespace malab;

namespace {

int failures = 0;

std::string str(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

void verdict(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %2d %-18s %s\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

double secondsSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- shared artifacts -------------------------------------------------------

struct QuadSolve {
  CatalogEntry cat;
  MASolution sol;
  double seconds = 0;
  double supErr = 0;
};

QuadSolve solveQuadratic(double h) {
  QuadSolve q;
  q.cat = analyticCatalog("quadratic_disc", h);
  DensitySpec f;  // constant 1
  const auto t0 = std::chrono::steady_clock::now();
  q.sol = solve(makeProblem(q.cat.u.domain, f, h), 1e-6);
  q.seconds = secondsSince(t0);
  for (int i = 0; i < q.sol.u.nInterior; ++i)
    q.supErr = std::max(q.supErr, std::abs(q.sol.u.values[i] - q.cat.u.values[i]));
  return q;
}

struct Ensemble {
  std::vector<InstanceOutcome> outs;
  std::vector<std::string> reportDumps;
  double wall = 0;
};

ExperimentConfig ensembleConfig(double h, std::vector<std::string> stages) {
  ExperimentConfig cfg;
  cfg.domain = "disc";
  cfg.f.kind = DensitySpec::Kind::Random;
  cfg.f.lambda = 0.5;
  cfg.f.Lambda = 2.0;
  cfg.h = h;
  cfg.stages = std::move(stages);
  cfg.samples = 100;
  return cfg;
}

Ensemble runEnsemble(const ExperimentConfig& cfg, int nSeeds) {
  Ensemble e;
  const auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < nSeeds; ++s) {
    e.outs.push_back(runInstance(cfg, s));
    e.reportDumps.push_back(instanceReportJson(e.outs.back()).dump());
  }
  e.wall = secondsSince(t0);
  return e;
}

// every instance carries at least one such row and none of them fails
bool allRowsPass(const Ensemble& e, const std::string& id, std::string& why) {
  for (const auto& oc : e.outs) {
    bool seen = false;
    for (const auto& r : oc.rows) {
      if (r.inequality != id) continue;
      seen = true;
      if (!r.pass) {
        why = id + " fails on " + oc.id + str(" (lhs %.4g rhs %.4g)", r.lhs, r.rhs);
        return false;
      }
    }
    if (!seen) {
      why = oc.id + " carries no row " + id;
      return false;
    }
  }
  return true;
}

double minConst(const Ensemble& e, const std::string& name) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& oc : e.outs) v = std::min(v, oc.constants.at(name));
  return v;
}

double maxConst(const Ensemble& e, const std::string& name) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& oc : e.outs) v = std::max(v, oc.constants.at(name));
  return v;
}

bool within2x(double a, double b) {
  return a > 0 && b > 0 && std::max(a, b) / std::min(a, b) <= 2.0;
}

}  // namespace

int main() {
  std::printf("acceptance: n = 2, disc ensemble lambda = 1/2, Lambda = 2, 20 seeds\n");

  // shared artifacts; dependent criteria fail individually if these fail
  std::optional<QuadSolve> q64, q128;
  std::string quadErr;
  try {
    q64 = solveQuadratic(2.0 / 64);
    q128 = solveQuadratic(2.0 / 128);
  } catch (const std::exception& e) {
    quadErr = e.what();
  }

  std::optional<Ensemble> e64, e128;
  std::string ensErr, ens128Err;
  try {
    e64 = runEnsemble(ensembleConfig(2.0 / 64, knownStages()), 20);
  } catch (const std::exception& e) {
    ensErr = e.what();
  }
  try {
    e128 = runEnsemble(ensembleConfig(2.0 / 128, {"solve", "atlas", "hessmean", "main"}), 20);
  } catch (const std::exception& e) {
    ens128Err = e.what();
  }

  // 1. solver oracle: quadratic on the disc, sup error and convergence ------
  try {
    if (!q64 || !q128) throw Error(quadErr);
    const bool pass = q64->supErr <= 0.02 && q128->supErr <= q64->supErr / 1.5 &&
                      q64->seconds <= 60 && q128->seconds <= 60;
    verdict(1, "solver_oracle", pass,
            str("sup err %.3g (64) -> %.3g (128), shrink %.2fx, %.1fs / %.1fs", q64->supErr,
                q128->supErr, q64->supErr / q128->supErr, q64->seconds, q128->seconds));
  } catch (const std::exception& e) {
    verdict(1, "solver_oracle", false, e.what());
  }

  // 2. John normalization on random polygons --------------------------------
  try {
    Rng rng(2026);
    const auto t0 = std::chrono::steady_clock::now();
    double worstIn = 1e9, worstOut = 0, worstLo = 1e9, worstHi = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const double a = std::exp(rng.uniform(-1.2, 1.2));
      const double b = std::exp(rng.uniform(-1.2, 1.2));
      const double phi = rng.uniform(0, pi());
      const Vec2 shift = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
      const int m = 5 + static_cast<int>(rng.below(8));
      std::vector<Vec2> pts;
      for (int i = 0; i < m; ++i) {
        const double ang = 2.0 * pi() * (i + 0.2 * rng.uniform()) / m;
        const double r = 1.0 + 0.5 * rng.uniform();
        const Vec2 e = vec2(a * r * std::cos(ang), b * r * std::sin(ang));
        pts.push_back(shift + vec2(std::cos(phi) * e[0] - std::sin(phi) * e[1],
                                   std::sin(phi) * e[0] + std::cos(phi) * e[1]));
      }
      const Polygon hull = convexHull2(pts);
      const Map2 T = johnNormalize<2>(bodyFromPolygon(hull));
      Polygon mapped;
      for (const auto& v : hull) mapped.push_back(T(v));
      worstIn = std::min(worstIn, polygonInradiusAt(mapped, vec2(0, 0)));
      worstOut = std::max(worstOut, polygonCircumradiusAt(mapped, vec2(0, 0)));
      const double scaled = T.detA * polygonArea(hull);
      worstLo = std::min(worstLo, scaled);
      worstHi = std::max(worstHi, scaled);
    }
    const double dt = secondsSince(t0);
    const bool pass = worstIn >= 1.0 - 1e-6 && worstOut <= 2.0 + 2e-6 &&
                      worstLo >= pi() * (1 - 1e-5) && worstHi <= 4 * pi() * (1 + 1e-5) &&
                      dt <= 5.0;
    verdict(2, "john_normalize", pass,
            str("100 polygons: inradius >= %.8f, circumradius <= %.8f, det bounds "
                "[%.4f pi, %.4f pi], %.2fs",
                worstIn, worstOut, worstLo / pi(), worstHi / pi(), dt));
  } catch (const std::exception& e) {
    verdict(2, "john_normalize", false, e.what());
  }

  // 3. section geometry: inclusions on the ensemble, exact quadratic shape --
  try {
    if (!e64) throw Error(ensErr);
    std::string why;
    bool pass = true;
    for (const char* id : {"secprop_engulfing", "section_inclusion", "section_dilation",
                           "normalize_2s", "det_bound", "norm_identity"})
      if (!allRowsPass(*e64, id, why)) {
        pass = false;
        break;
      }
    double scanned = 0;
    for (const auto& oc : e64->outs) scanned += oc.constants.at("sections_scanned");
    if (scanned < 2000) {
      pass = false;
      why = str("only %.0f sections scanned", scanned);
    }

    // shape constants on the exact quadratic: beta(tau) = sqrt(tau), theta -> 9
    const CatalogEntry ent = analyticCatalog("quadratic_disc", 2.0 / 128);
    const auto betas = sampleCenters(ent.u, innerRegion(ent.u, 0.25), 150);
    const EngulfingReport eb =
        verifyEngulfing(ent.u, 1.0 / 16, betas, {0.25, 0.5, 0.75}, {0.25, 0.125, 0.0625}, 0.0625);
    double betaDrift = 0;
    for (double tau : {0.25, 0.5, 0.75})
      betaDrift = std::max(betaDrift, std::abs(eb.betaAt(tau) / std::sqrt(tau) - 1.0));
    const auto thetas = sampleCenters(ent.u, innerRegion(ent.u, 0.55), 150);
    const EngulfingReport et =
        verifyEngulfing(ent.u, 1.0 / 16, thetas, {0.5}, {0.0625}, 0.0625);
    if (betaDrift > 0.05) {
      pass = false;
      why = str("beta drift %.3f", betaDrift);
    }
    if (et.pairs == 0 || std::abs(et.theta / 9.0 - 1.0) > 0.05) {
      pass = false;
      why = str("theta %.3f over %d pairs", et.theta, et.pairs);
    }
    verdict(3, "section_geometry", pass,
            pass ? str("%.0f sections pass, beta drift %.2f%%, theta %.3f (%d pairs)", scanned,
                       100 * betaDrift, et.theta, et.pairs)
                 : why);
  } catch (const std::exception& e) {
    verdict(3, "section_geometry", false, e.what());
  }

  // 4. covering with uniformly bounded overlap ------------------------------
  try {
    if (!e64) throw Error(ensErr);
    std::string why;
    const bool rows = allRowsPass(*e64, "covering_overlap", why);
    const double kLo = minConst(*e64, "K"), kHi = maxConst(*e64, "K");
    const bool pass = rows && kLo > 0 && std::isfinite(kHi);
    verdict(4, "covering", pass,
            rows ? str("K in [%.3f, %.3f] across instances, overlap stable across eps", kLo, kHi)
                 : why);
  } catch (const std::exception& e) {
    verdict(4, "covering", false, e.what());
  }

  // 5. normalized-solution band |inf v| across the rough ensemble -----------
  try {
    if (!e64 || !e128) throw Error(ensErr + ens128Err);
    std::string why;
    const bool rows = allRowsPass(*e64, "alex_band", why);
    const double lo64 = minConst(*e64, "band_c1"), hi64 = maxConst(*e64, "band_c2");
    const double lo128 = minConst(*e128, "band_c1"), hi128 = maxConst(*e128, "band_c2");
    const bool pass = rows && hi64 / lo64 <= 20.0 && within2x(lo64, lo128) &&
                      within2x(hi64, hi128);
    verdict(5, "alexandrov_band", pass,
            rows ? str("band [%.3f, %.3f] ratio %.2f at 64^2; [%.3f, %.3f] at 128^2", lo64, hi64,
                       hi64 / lo64, lo128, hi128)
                 : why);
  } catch (const std::exception& e) {
    verdict(5, "alexandrov_band", false, e.what());
  }

  // 6. hessmean: positive C1, resolution-stable, ratio 1 on the quadratic ---
  try {
    if (!e64 || !e128) throw Error(ensErr + ens128Err);
    if (!q128) throw Error(quadErr);
    std::string why;
    bool pass = allRowsPass(*e64, "hessmean", why);
    for (size_t s = 0; pass && s < e64->outs.size(); ++s) {
      const double c64 = e64->outs[s].constants.at("C1");
      const double c128 = e128->outs[s].constants.at("C1");
      const double n64 = e64->outs[s].constants.at("hessmean_count");
      const double n128 = e128->outs[s].constants.at("hessmean_count");
      if (!(c64 > 0 && n64 >= 100 && n128 >= 100 && within2x(c64, c128))) {
        pass = false;
        why = str("seed %zu: C1 %.3f (64) vs %.3f (128), counts %.0f / %.0f", s, c64, c128, n64,
                  n128);
      }
    }
    // sections need tens of lattice cells of radius before their John shape
    // is resolvable, so the two-sided check runs on the fine solve
    const auto centers = sampleCenters(q128->sol.u, innerRegion(q128->sol.u, 0.4), 120);
    const HessmeanReport hm = verifyHessmean(q128->sol.u, centers, {1.0 / 8, 1.0 / 16});
    double hi = 0;
    for (const auto& s : hm.samples) hi = std::max(hi, s.ratio);
    if (!(hm.samples.size() >= 100 && hm.C1 >= 0.95 && hi <= 1.05)) {
      pass = false;
      why = str("quadratic ratio [%.4f, %.4f] over %zu sections", hm.C1, hi, hm.samples.size());
    }
    verdict(6, "hessmean", pass,
            pass ? str("C1 in [%.3f, %.3f], quadratic ratio [%.4f, %.4f] over %zu sections",
                       minConst(*e64, "C1"), maxConst(*e64, "C1"), hm.C1, hi, hm.samples.size())
                 : why);
  } catch (const std::exception& e) {
    verdict(6, "hessmean", false, e.what());
  }

  // 7. hesssupermean: contact fraction, Hessian floor, measure chain --------
  try {
    if (!e64) throw Error(ensErr);
    std::string why;
    bool pass = true;
    for (const char* id : {"hesssupermean_fraction", "hesssupermean_floor", "measure_chain"})
      if (!allRowsPass(*e64, id, why)) {
        pass = false;
        break;
      }
    const double c2 = minConst(*e64, "C2"), share = minConst(*e64, "floor_share");
    const double eps1 = minConst(*e64, "eps1");
    if (!(c2 > 0 && eps1 > 0 && share >= 0.95)) {
      pass = false;
      why = str("C2 %.4f, eps1 %.4f, floor share %.3f", c2, eps1, share);
    }
    verdict(7, "hesssupermean", pass,
            pass ? str("C2 >= %.3f, eps1 >= %.3f, floor share >= %.3f, C3 >= %.3f", c2, eps1,
                       share, minConst(*e64, "C3"))
                 : why);
  } catch (const std::exception& e) {
    verdict(7, "hesssupermean", false, e.what());
  }

  // 8. level sets and the truncated maximal inequality ----------------------
  try {
    if (!e64) throw Error(ensErr);
    std::string why;
    bool pass = true;
    for (const char* id : {"levelsets", "levelsets_replay", "maximalineq"})
      if (!allRowsPass(*e64, id, why)) {
        pass = false;
        break;
      }
    for (const char* name : {"C4", "C5", "Cprime", "Cdd", "alpha0"})
      if (!(minConst(*e64, name) > 0 && std::isfinite(maxConst(*e64, name)))) {
        pass = false;
        why = std::string(name) + " is not a finite positive constant";
      }
    verdict(8, "levelsets", pass,
            pass ? str("C4 <= %.3f, C5 >= %.4f, C' <= %.3f, alpha0 <= %.3f",
                       maxConst(*e64, "C4"), minConst(*e64, "C5"), maxConst(*e64, "Cprime"),
                       maxConst(*e64, "alpha0"))
                 : why);
  } catch (const std::exception& e) {
    verdict(8, "levelsets", false, e.what());
  }

  // 9. interior integral gain I_{k+1}(U/2) <= C(k) I_k(3U/4) ----------------
  try {
    if (!e64 || !e128) throw Error(ensErr + ens128Err);
    std::string why;
    bool pass = true;
    double agree = 0;
    for (int k = 0; k <= 2 && pass; ++k) {
      const std::string suffix = "_k" + std::to_string(k);
      if (!allRowsPass(*e64, "main" + suffix, why) ||
          !allRowsPass(*e64, "layer_cake" + suffix, why)) {
        pass = false;
        break;
      }
      const double c64 = maxConst(*e64, "main_C" + suffix);
      const double c128 = maxConst(*e128, "main_C" + suffix);
      if (!within2x(c64, c128)) {
        pass = false;
        why = str("C(%d) drifts %.3f -> %.3f between resolutions", k, c64, c128);
      }
      agree = std::max(agree, maxConst(*e64, "cake_agreement" + suffix));
    }
    if (pass && agree > 0.01) {
      pass = false;
      why = str("layer-cake disagreement %.3g", agree);
    }
    verdict(9, "main_estimate", pass,
            pass ? str("C(0) <= %.3f, C(1) <= %.3f, C(2) <= %.3f, cake agreement <= %.2g",
                       maxConst(*e64, "main_C_k0"), maxConst(*e64, "main_C_k1"),
                       maxConst(*e64, "main_C_k2"), agree)
                 : why);
  } catch (const std::exception& e) {
    verdict(9, "main_estimate", false, e.what());
  }

  // 10. reduction to normalized pieces at fixed height ----------------------
  try {
    if (!e64) throw Error(ensErr);
    std::string why;
    bool pass = allRowsPass(*e64, "comp_band", why);
    for (int k = 0; k <= 2 && pass; ++k)
      if (!allRowsPass(*e64, "reg_reduction_k" + std::to_string(k), why)) pass = false;
    const double r1 = minConst(*e64, "r1"), r2 = maxConst(*e64, "r2");
    const double pieces = maxConst(*e64, "reg_pieces");
    if (!(r1 > 0 && r2 >= r1 && pieces >= 1 && std::isfinite(pieces))) {
      pass = false;
      why = str("r1 %.4f, r2 %.4f, pieces %.0f", r1, r2, pieces);
    }
    verdict(10, "reg_reduction", pass,
            pass ? str("N <= %.0f pieces, r1 >= %.4f, r2 <= %.4f, assembled bound holds for "
                       "k = 0, 1, 2",
                       pieces, r1, r2)
                 : why);
  } catch (const std::exception& e) {
    verdict(10, "reg_reduction", false, e.what());
  }

  // 11. full pipeline wall time and determinism -----------------------------
  try {
    if (!e64) throw Error(ensErr);
    bool pass = e64->wall <= 1800.0;
    std::string why = str("20-seed 64^2 pipeline took %.1fs", e64->wall);
    for (size_t s : {size_t(0), size_t(7)}) {
      const InstanceOutcome oc = runInstance(ensembleConfig(2.0 / 64, knownStages()), s);
      if (instanceReportJson(oc).dump() != e64->reportDumps[s] ||
          oc.sol.u.values != e64->outs[s].sol.u.values) {
        pass = false;
        why = str("seed %zu replay is not bit-identical", s);
      }
    }
    verdict(11, "pipeline", pass,
            pass ? str("%.1fs for 20 seeds at 64^2, replays bit-identical", e64->wall) : why);
  } catch (const std::exception& e) {
    verdict(11, "pipeline", false, e.what());
  }

  std::printf("%d of 11 criteria pass\n", 11 - failures);
  return failures;
}
