#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "atlas.hpp"
#include "catalog.hpp"
#include "covering.hpp"
#include "estimates.hpp"
#include "global_estimates.hpp"
#include "maximal.hpp"
#include "serialize.hpp"
#include "solver.hpp"

namespace malab {

// Verdict pins, fixed before any run: lower-bounded constants must clear the
// floors, upper-bounded ones must stay under the ceilings. These are sanity
// envelopes for "a finite positive constant exists", not fitted values.
inline constexpr double kThetaBudget = 100.0;  // engulfing factor ceiling
inline constexpr double kC1Floor = 1e-3;       // size / Hessian-average floor
inline constexpr double kC2Floor = 1e-4;       // contact fraction floor
inline constexpr double kC3Floor = 1e-4;       // Hessian floor-ratio floor
inline constexpr double kC4Budget = 1e3;       // level-set distribution ceiling
inline constexpr double kCprimeBudget = 1e3;   // truncated maximal-bound ceiling
inline constexpr double kMainBudget = 1e2;     // interior gain ratio ceiling
inline constexpr double kRegBudget = 1e4;      // assembled piece-sum ceiling
inline constexpr double kLayerCakeTol = 1e-6;  // layer-cake replay agreement
inline constexpr double kNormIdTol = 1e-8;     // operator-norm identity slack

inline const std::vector<std::string>& knownStages() {
  static const std::vector<std::string> s{"solve",     "atlas", "hessmean", "hesssupermean",
                                          "levelsets", "main",  "reg"};
  return s;
}

struct ExperimentConfig {
  std::string domain = "disc";  // "disc", "quadratic_disc", or "custom"
  Polygon customDomain;
  DensitySpec f;
  double h = 2.0 / 64;
  double tol = 1e-6;
  std::vector<std::string> stages = knownStages();
  std::vector<int> kRange = {0, 1, 2};
  int samples = 100;
  std::vector<std::uint64_t> seeds = {0};
  std::string outDir = ".";

  // "grid" > 1 is a lattice count n (h = 2/n), <= 1 is the step itself
  static ExperimentConfig fromJson(const json& j) {
    ExperimentConfig c;
    if (j.contains("domain")) {
      const json& d = j["domain"];
      if (d.is_array()) {
        c.domain = "custom";
        for (const auto& v : d) c.customDomain.push_back(vec2(v.at(0), v.at(1)));
      } else {
        c.domain = d.get<std::string>();
      }
    }
    if (j.contains("f")) c.f = densityFromJson(j["f"]);
    if (j.contains("grid")) {
      const double g = j["grid"].get<double>();
      c.h = g > 1 ? 2.0 / g : g;
    }
    c.tol = j.value("tol", 1e-6);
    if (j.contains("stages")) c.stages = j["stages"].get<std::vector<std::string>>();
    if (j.contains("k")) {
      if (j["k"].is_array())
        c.kRange = j["k"].get<std::vector<int>>();
      else
        c.kRange = {j["k"].get<int>()};
    }
    c.samples = j.value("samples", 100);
    if (j.contains("seeds")) {
      if (j["seeds"].is_array()) {
        c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      } else {
        c.seeds.clear();
        for (std::uint64_t s = 0; s < j["seeds"].get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      }
    } else {
      c.seeds = {c.f.seed};
    }
    c.outDir = j.value("out", ".");
    return c;
  }

  // identity of the experiment; the output directory is not part of it
  json canonicalJson() const {
    json d;
    if (domain == "custom") {
      json verts = json::array();
      for (const auto& v : customDomain) verts.push_back({v[0], v[1]});
      d = verts;
    } else {
      d = domain;
    }
    return json{{"domain", d},     {"f", densityToJson(f)}, {"grid_h", h},
                {"tol", tol},      {"stages", stages},      {"k", kRange},
                {"samples", samples}, {"seeds", seeds}};
  }

  void validate() const {
    if (!(f.lambda > 0) || !(f.Lambda >= f.lambda))
      throw InfeasibleMass("need 0 < lambda <= Lambda in the density spec");
    if (!(h > 0) || h > 0.5) throw InfeasibleMass("grid step must sit in (0, 1/2]");
    if (!(tol > 0)) throw InfeasibleMass("solve tolerance must be positive");
    if (samples < 1) throw InfeasibleMass("need at least one section sample");
    if (seeds.empty()) throw InfeasibleMass("need at least one seed");
    if (kRange.empty()) throw InfeasibleMass("need at least one k");
    for (int k : kRange)
      if (k < 0 || k > 8) throw InfeasibleMass("k must sit in 0..8");
    if (domain != "disc" && domain != "quadratic_disc" && domain != "custom")
      throw UnknownName("domain '" + domain + "'");
    if (domain == "custom") bodyFromPolygon(customDomain);  // throws if degenerate

    if (stages.empty()) throw UnknownName("stage list is empty");
    int solveAt = -1;
    for (size_t i = 0; i < stages.size(); ++i) {
      if (std::find(knownStages().begin(), knownStages().end(), stages[i]) ==
          knownStages().end())
        throw UnknownName("stage '" + stages[i] + "'");
      if (std::count(stages.begin(), stages.begin() + i + 1, stages[i]) > 1)
        throw UnknownName("stage '" + stages[i] + "' listed twice");
      if (stages[i] == "solve") solveAt = static_cast<int>(i);
    }
    if (solveAt != 0)
      throw UnknownName("the stage list must start with 'solve' (everything here "
                        "verifies a solved instance)");
  }
};

inline std::string instanceId(const ExperimentConfig& cfg, std::uint64_t seed) {
  const DensitySpec& f = cfg.f;
  const char* kind = cfg.domain == "quadratic_disc" ? "const" : f.kindName();
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s-%s-s%llu-n%d", cfg.domain.c_str(), kind,
                static_cast<unsigned long long>(seed),
                static_cast<int>(std::lround(2.0 / cfg.h)));
  return buf;
}

struct ReportRow {
  std::string instance;
  std::string inequality;
  double lhs = 0;
  double rhs = 0;
  double constant = 0;
  bool pass = false;
};

inline constexpr const char* kReportCsvHeader =
    "instance_id,inequality_id,lhs,rhs,constant,verdict";

inline std::string csvLine(const ReportRow& r) {
  return r.instance + "," + r.inequality + "," + formatNumber(r.lhs) + "," +
         formatNumber(r.rhs) + "," + formatNumber(r.constant) + "," +
         (r.pass ? "pass" : "fail");
}

struct StageClock {
  std::string stage;
  double seconds = 0;
};

struct InstanceOutcome {
  std::string id;
  MASolution sol;
  DensitySpec spec;
  SectionAtlas atlas;
  bool wroteAtlas = false;
  CoverResult atlasCover;  // cover at eps0, for the overlap profile
  bool hasCover = false;
  std::vector<ReportRow> rows;
  std::map<std::string, double> constants;
  std::vector<StageClock> clocks;

  void addRow(const std::string& ineq, double lhs, double rhs, double constant, bool pass) {
    rows.push_back({id, ineq, lhs, rhs, constant, pass});
  }
  int failedRows() const {
    int n = 0;
    for (const auto& r : rows) n += !r.pass;
    return n;
  }
};

// A stage failure keeps the exit class of the underlying error and records
// where in the pipeline it happened.
struct StageFailure : Error {
  std::string stage, instance;
  int code;
  StageFailure(const std::string& stage_, const std::string& instance_, int code_,
               const std::string& inner)
      : Error("stage '" + stage_ + "' on instance '" + instance_ + "': " + inner),
        stage(stage_),
        instance(instance_),
        code(code_) {}
};

// Exit classes: 2 = unusable input (config, schema, names, problem setup),
// 3 = solver gave up, 4 = a geometric/measure verification failed.
inline int exitCodeFor(const std::exception& e) {
  if (const auto* sf = dynamic_cast<const StageFailure*>(&e)) return sf->code;
  if (dynamic_cast<const NoConvergence*>(&e)) return 3;
  if (dynamic_cast<const MixedSchema*>(&e) || dynamic_cast<const UnknownName*>(&e) ||
      dynamic_cast<const InfeasibleMass*>(&e) || dynamic_cast<const NonConvexInput*>(&e))
    return 2;
  if (dynamic_cast<const Error*>(&e)) return 4;
  return 2;  // parse errors, bad files, everything pre-pipeline
}

struct InstanceState {
  ExperimentConfig cfg;  // seed already substituted into cfg.f
  Body2 domain;
  InstanceOutcome out;
  bool solved = false;
  double rho = 0;
  std::vector<int> centers;
  bool basisReady = false;
  MaximalField mf;
  bool mfReady = false;
};

inline InstanceState makeState(const ExperimentConfig& cfg, std::uint64_t seed) {
  InstanceState st;
  st.cfg = cfg;
  st.cfg.f.seed = seed;
  if (cfg.domain == "quadratic_disc") {
    st.cfg.f.kind = DensitySpec::Kind::Const;
    st.cfg.f.lambda = st.cfg.f.Lambda = 1.0;
  }
  st.domain = cfg.domain == "custom" ? bodyFromPolygon(cfg.customDomain)
                                     : discDomain(1.0, cfg.h);
  st.out.id = instanceId(cfg, seed);
  st.out.spec = st.cfg.f;
  return st;
}

// Wrap a loaded solution so single verification stages can run on it.
inline InstanceState stateFromSolution(const LoadedSolution& ls, const std::string& id,
                                       int samples, const std::vector<int>& kRange) {
  InstanceState st;
  st.cfg.h = ls.u.grid.h;
  st.cfg.f = ls.spec;
  st.cfg.samples = samples;
  st.cfg.kRange = kRange;
  st.domain = ls.u.domain;
  st.out.id = id;
  st.out.spec = ls.spec;
  st.out.sol.u = ls.u;
  st.out.sol.residual = ls.residual;
  st.out.sol.iterations = ls.iterations;
  st.solved = true;
  return st;
}

namespace detail {

inline void ensureBasis(InstanceState& st) {
  if (st.basisReady) return;
  const PLConvexFunction& u = st.out.sol.u;
  const Body2 half = innerRegion(u, 0.5);
  st.rho = safeHeight(u, half, innerRegion(u, 0.75));
  st.centers = sampleCenters(u, half, st.cfg.samples);
  st.out.atlas.rho = st.rho;
  st.out.constants["rho"] = st.rho;
  st.basisReady = true;
}

inline void ensureMaximalField(InstanceState& st) {
  if (st.mfReady) return;
  ensureBasis(st);
  st.mf = maximalField(st.out.sol.u, innerRegion(st.out.sol.u, 0.5), st.rho);
  st.mfReady = true;
}

inline void stageSolve(InstanceState& st) {
  const MAProblem prob = makeProblem(st.domain, st.cfg.f, st.cfg.h);
  st.out.sol = solve(prob, st.cfg.tol);
  st.solved = true;
  st.out.addRow("alexandrov_solution", st.out.sol.residual, st.cfg.tol,
                st.out.sol.iterations, st.out.sol.residual <= st.cfg.tol);
  st.out.constants["residual"] = st.out.sol.residual;
  st.out.constants["iterations"] = st.out.sol.iterations;
}

// Section-geometry battery: engulfing constants, monotonicity and the
// doubling chain S(x,t) in S(x,2t) in 2 S(x,t), the John normalization bounds
// on det T and the 2x2 norm identities, the mapped doubled section against
// B(0, 3n), the normalized-minimum band, and the covering overlap at three
// thresholds. Samples run over the center set at heights rho and rho/2.
inline void stageAtlas(InstanceState& st) {
  ensureBasis(st);
  const PLConvexFunction& u = st.out.sol.u;
  InstanceOutcome& out = st.out;
  const double h = u.grid.h;

  const EngulfingReport eng = verifyEngulfing(u, st.rho, st.centers);
  out.atlas.beta = eng.beta;
  out.atlas.theta = eng.theta;
  out.addRow("secprop_engulfing", eng.theta, kThetaBudget, eng.theta,
             eng.theta <= kThetaBudget && eng.pairs > 0);
  out.constants["theta"] = eng.theta;
  out.constants["beta_025"] = eng.betaAt(0.25);
  out.constants["beta_050"] = eng.betaAt(0.5);
  out.constants["beta_075"] = eng.betaAt(0.75);
  out.constants["engulfing_triples"] = eng.triples;
  out.constants["engulfing_pairs"] = eng.pairs;

  int monoViolations = 0, scanned = 0, skipped = 0;
  double worstGap = 0, worstNorm2S = 0, worstDet = 0, worstId = 0;
  double bandLo = std::numeric_limits<double>::infinity(), bandHi = 0;
  for (int id : st.centers) {
    for (double t : {st.rho, st.rho / 2}) {
      try {
        const Section s1 = section(u, id, t);
        const Section s2 = section(u, id, 2 * t);
        if (s1.hull.size() < 3 || s2.hull.size() < 3) {
          ++skipped;
          continue;
        }
        if (!std::includes(s2.nodes.begin(), s2.nodes.end(), s1.nodes.begin(), s1.nodes.end()))
          ++monoViolations;

        const Body2 doubled = bodyFromPolygon(polygonDilate(s1.hull, s1.x, 2.0));
        for (const auto& v : s2.hull) worstGap = std::max(worstGap, doubled.membershipGap(v));

        const Map2 T = johnNormalize<2>(s1.body());
        double mapped = 0;
        for (const auto& v : s2.hull) mapped = std::max(mapped, norm(T(v)));
        worstNorm2S = std::max(worstNorm2S, mapped - 1.5 * h * T.normA);
        worstDet = std::max(worstDet, pi() / (T.detA * s1.hullArea()));
        worstId = std::max({worstId, std::abs(T.normAdj - T.normA) / T.normA,
                            std::abs(operatorNorm(T.Ainv) * T.detA - T.normA) / T.normA});
        const double band = t * T.detA;  // = |inf_Z v| for the PL solution
        bandLo = std::min(bandLo, band);
        bandHi = std::max(bandHi, band);
        ++scanned;
      } catch (const EscapesDomain&) {
        ++skipped;
      } catch (const DegenerateBody&) {
        ++skipped;
      } catch (const ShapeDegeneracy&) {
        ++skipped;
      }
    }
  }
  out.addRow("section_inclusion", monoViolations, 0, scanned, monoViolations == 0 && scanned > 0);
  out.addRow("section_dilation", worstGap, 1.5 * h, scanned, worstGap <= 1.5 * h);
  out.addRow("normalize_2s", worstNorm2S, 6.0, worstNorm2S / 6.0, worstNorm2S <= 6.0);
  out.addRow("det_bound", worstDet, 1.0 + 1e-5, worstDet, worstDet <= 1.0 + 1e-5);
  out.addRow("norm_identity", worstId, kNormIdTol, worstId, worstId <= kNormIdTol);
  out.addRow("alex_band", bandLo, bandHi, bandHi / bandLo, bandLo > 0 && scanned > 0);
  out.constants["sections_scanned"] = scanned;
  out.constants["sections_skipped"] = skipped;
  out.constants["band_c1"] = bandLo;
  out.constants["band_c2"] = bandHi;
  out.constants["band_ratio"] = bandHi / bandLo;

  std::vector<CoverCandidate> cands;
  for (int id : st.centers) cands.push_back({id, st.rho});
  const CoverResult c05 = cover(u, cands, 0.5);
  const CoverResult c01 = cover(u, cands, 0.1);
  const CoverResult c001 = cover(u, cands, 0.01);
  const double k05 = c05.overlapConstant(), k01 = c01.overlapConstant(),
               k001 = c001.overlapConstant();
  out.atlas.K = std::max({k05, k01, k001});
  // drift is judged on the two thresholds with |log eps| >> 1
  const double kHi = std::max(k01, k001), kLo = std::min(k01, k001);
  out.addRow("covering_overlap", kHi, 2.0 * kLo, out.atlas.K, kHi <= 2.0 * kLo);
  out.constants["K"] = out.atlas.K;
  out.constants["K_05"] = k05;
  out.constants["K_01"] = k01;
  out.constants["K_001"] = k001;
  out.constants["eps0"] = out.atlas.eps0;
  out.atlasCover = c01;
  out.hasCover = true;
  if (out.atlas.eps2 <= 0) out.atlas.eps2 = out.atlas.eps0;
  out.wroteAtlas = true;
}

inline void stageHessmean(InstanceState& st) {
  ensureBasis(st);
  const HessmeanReport hm = verifyHessmean(st.out.sol.u, st.centers, {st.rho, st.rho / 2});
  const int count = static_cast<int>(hm.samples.size());
  st.out.addRow("hessmean", kC1Floor, hm.C1, hm.C1, hm.C1 >= kC1Floor && count >= 10);
  st.out.constants["C1"] = hm.C1;
  st.out.constants["c_grad"] = hm.cGrad;
  st.out.constants["hessmean_count"] = count;
}

inline void stageHesssupermean(InstanceState& st) {
  ensureBasis(st);
  const int nSup = std::min<int>(static_cast<int>(st.centers.size()),
                                 std::max(12, st.cfg.samples / 5));
  const std::vector<int> supCenters(st.centers.begin(), st.centers.begin() + nSup);
  const std::vector<double> epsGrid{0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  const SupermeanReport sm = verifyHesssupermean(st.out.sol.u, supCenters, {st.rho}, epsGrid,
                                                 st.cfg.f.Lambda);

  // worst fraction at the measured eps1 (>= C2/2 by construction)
  size_t e1 = 0;
  for (size_t e = 0; e < epsGrid.size(); ++e)
    if (epsGrid[e] <= sm.eps1) e1 = e;
  double fracAtEps1 = std::numeric_limits<double>::infinity();
  std::vector<double> floors;
  double worstChainLhs = 0, worstChainRhs = 1, worstChain = 0;
  for (const auto& s : sm.samples) {
    fracAtEps1 = std::min(fracAtEps1, s.fraction[e1]);
    floors.push_back(s.floorRatio);
    const double r = s.chainRhs > 0 ? s.chainLhs / s.chainRhs
                                    : std::numeric_limits<double>::infinity();
    if (r >= worstChain) {
      worstChain = r;
      worstChainLhs = s.chainLhs;
      worstChainRhs = s.chainRhs;
    }
  }
  std::sort(floors.begin(), floors.end());
  const size_t n = floors.size();
  const double c395 = n ? floors[n / 20] : 0.0;  // valid on >= 95% of sections
  double share = 0;
  for (double f : floors) share += f > 0;
  share = n ? share / n : 0.0;

  InstanceOutcome& out = st.out;
  out.addRow("hesssupermean_fraction", kC2Floor, sm.C2, sm.C2,
             sm.C2 >= kC2Floor && sm.eps1 > 0 && fracAtEps1 >= sm.C2 / 2);
  out.addRow("hesssupermean_floor", share, 0.95, c395, share >= 0.95 && c395 >= kC3Floor);
  out.addRow("measure_chain", worstChainLhs, worstChainRhs, worstChain, worstChain <= 1.0);
  out.constants["C2"] = sm.C2;
  out.constants["C3"] = c395;
  out.constants["eps1"] = sm.eps1;
  out.constants["c1_used"] = sm.c1Used;
  out.constants["floor_share"] = share;
  out.constants["supermean_count"] = static_cast<double>(n);
  out.atlas.eps1 = sm.eps1;
  out.atlas.eps2 = sm.eps1 > 0 ? std::min(out.atlas.eps0, sm.eps1) : out.atlas.eps0;
}

inline void stageLevelsets(InstanceState& st) {
  ensureMaximalField(st);
  InstanceOutcome& out = st.out;
  const double eps2 = out.atlas.eps2 > 0 ? out.atlas.eps2 : out.atlas.eps0;
  const LevelsetsReport ls = verifyLevelsets(out.sol.u, st.mf, eps2);
  out.addRow("levelsets", ls.C4, kC4Budget, ls.C4, ls.feasible && ls.C4 <= kC4Budget);
  double worstDirect = 0, itsAssembled = 1;
  for (const auto& rr : ls.replay) {
    if (rr.assembled > 0 && rr.direct / rr.assembled >= worstDirect / itsAssembled) {
      worstDirect = rr.direct;
      itsAssembled = rr.assembled;
    }
  }
  out.addRow("levelsets_replay", worstDirect, itsAssembled, ls.K, ls.replayOk);
  out.constants["C4"] = ls.C4;
  out.constants["C5"] = ls.C5;
  out.constants["K_replay"] = ls.K;
  out.constants["eps2"] = eps2;

  const MaximalIneqReport mi = verifyMaximalIneq(out.sol.u, st.mf);
  out.addRow("maximalineq", mi.Cprime, kCprimeBudget, mi.Cprime,
             mi.ok && mi.Cprime <= kCprimeBudget);
  out.constants["Cprime"] = mi.Cprime;
  out.constants["Cdd"] = mi.Cdd;
  out.constants["alpha0"] = mi.alpha0;
}

inline void stageMain(InstanceState& st) {
  InstanceOutcome& out = st.out;
  for (int k : st.cfg.kRange) {
    const MainReport mr = verifyMain(out.sol.u, k);
    const std::string suffix = "_k" + std::to_string(k);
    out.addRow("main" + suffix, mr.lhs, mr.rhs, mr.ratio,
               mr.decompositionOk && mr.rhs > 0 && mr.ratio <= kMainBudget);
    out.addRow("layer_cake" + suffix, mr.cake.direct, mr.cake.fubini, mr.cake.agreement(),
               mr.cake.agreement() <= kLayerCakeTol);
    out.constants["main_C" + suffix] = mr.ratio;
    out.constants["cake_agreement" + suffix] = mr.cake.agreement();
  }
}

inline void stageReg(InstanceState& st) {
  ensureBasis(st);
  InstanceOutcome& out = st.out;
  bool first = true;
  for (int k : st.cfg.kRange) {
    const RegReport rr = verifyRegReduction(out.sol.u, k, st.rho);
    const std::string suffix = "_k" + std::to_string(k);
    out.addRow("reg_reduction" + suffix, rr.IkInner, rr.sumPieces, rr.assembled,
               rr.coverDominates && rr.assembled <= kRegBudget);
    out.constants["reg_assembled" + suffix] = rr.assembled;
    if (first) {
      out.addRow("comp_band", rr.r1, rr.r2, rr.r2 / rr.r1, rr.r1 > 0 && rr.r2 >= rr.r1);
      out.constants["reg_pieces"] = rr.N;
      out.constants["r1"] = rr.r1;
      out.constants["r2"] = rr.r2;
      first = false;
    }
  }
}

}  // namespace detail

inline void runStageOn(InstanceState& st, const std::string& stage) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (stage != "solve" && !st.solved)
      throw UnknownName("stage '" + stage + "' needs a solved instance first");
    if (stage == "solve")
      detail::stageSolve(st);
    else if (stage == "atlas")
      detail::stageAtlas(st);
    else if (stage == "hessmean")
      detail::stageHessmean(st);
    else if (stage == "hesssupermean")
      detail::stageHesssupermean(st);
    else if (stage == "levelsets")
      detail::stageLevelsets(st);
    else if (stage == "main")
      detail::stageMain(st);
    else if (stage == "reg")
      detail::stageReg(st);
    else
      throw UnknownName("stage '" + stage + "'");
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(stage, st.out.id, exitCodeFor(e), e.what());
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  st.out.clocks.push_back({stage, dt.count()});
}

inline InstanceOutcome runInstance(const ExperimentConfig& cfg, std::uint64_t seed) {
  InstanceState st = makeState(cfg, seed);
  for (const std::string& stage : cfg.stages) runStageOn(st, stage);
  return std::move(st.out);
}

inline json atlasToJson(const SectionAtlas& a) {
  json beta = json::array();
  for (const auto& [tau, b] : a.beta) beta.push_back({tau, b});
  return json{{"schema", kSchema}, {"rho", a.rho},   {"beta", beta},
              {"theta", a.theta},  {"eps0", a.eps0}, {"eps1", a.eps1},
              {"eps2", a.eps2},    {"K", a.K}};
}

inline json instanceReportJson(const InstanceOutcome& oc) {
  json rows = json::array();
  for (const auto& r : oc.rows)
    rows.push_back({{"inequality", r.inequality},
                    {"lhs", r.lhs},
                    {"rhs", r.rhs},
                    {"constant", r.constant},
                    {"verdict", r.pass ? "pass" : "fail"}});
  json consts;
  for (const auto& [k, v] : oc.constants) consts[k] = v;
  return json{{"schema", kSchema}, {"instance", oc.id}, {"constants", consts}, {"rows", rows}};
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string fileDigest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnknownName("cannot digest '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a(bytes.data(), bytes.size()));
}

// Full pipeline: run every stage on every seed, write the solution / atlas /
// overlap / per-instance report files plus the combined CSV, digest them all,
// and close with a manifest carrying the config hash and stage wall times.
// The digests are a pure function of the config; the manifest itself (which
// holds timings) is the one file left out of them.
inline json run(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.outDir);
  const auto at = [&](const std::string& name) { return (fs::path(cfg.outDir) / name).string(); };

  const std::string cfgDump = cfg.canonicalJson().dump();
  json manifest{{"schema", kSchema},
                {"config_hash", hex64(fnv1a(cfgDump.data(), cfgDump.size()))},
                {"artifacts", {{"ma-lab", "1.0.0"}, {"formats", kSchema}}}};
  json clocks = json::array();
  std::vector<std::string> written;
  std::vector<std::string> csvRows;
  int failed = 0;

  for (std::uint64_t seed : cfg.seeds) {
    InstanceOutcome oc = runInstance(cfg, seed);
    writeJsonFile(at(oc.id + ".solution.json"),
                  solutionToJson(oc.sol.u, oc.sol.residual, oc.sol.iterations, oc.spec));
    written.push_back(oc.id + ".solution.json");
    if (oc.wroteAtlas) {
      writeJsonFile(at(oc.id + ".atlas.json"), atlasToJson(oc.atlas));
      written.push_back(oc.id + ".atlas.json");
    }
    if (oc.hasCover) {
      std::vector<std::string> lines;
      for (size_t i = 0; i < oc.atlasCover.overlap.size(); ++i)
        lines.push_back(std::to_string(i) + "," + std::to_string(oc.atlasCover.overlap[i]));
      writeCsvFile(at(oc.id + ".overlap.csv"), "node_id,overlap_count", lines);
      written.push_back(oc.id + ".overlap.csv");
    }
    writeJsonFile(at(oc.id + ".report.json"), instanceReportJson(oc));
    written.push_back(oc.id + ".report.json");
    for (const auto& r : oc.rows) csvRows.push_back(csvLine(r));
    failed += oc.failedRows();
    for (const auto& c : oc.clocks)
      clocks.push_back({{"instance", oc.id}, {"stage", c.stage}, {"seconds", c.seconds}});
  }

  writeCsvFile(at("report.csv"), kReportCsvHeader, csvRows);
  written.push_back("report.csv");

  json digests;
  std::sort(written.begin(), written.end());
  for (const auto& name : written) digests[name] = fileDigest(at(name));
  manifest["stages"] = clocks;
  manifest["digests"] = digests;
  manifest["failed_rows"] = failed;
  manifest["instances"] = static_cast<int>(cfg.seeds.size());
  writeJsonFile(at("manifest.json"), manifest);
  return manifest;
}

// --- cross-instance aggregation ------------------------------------------

struct AggregateTable {
  struct Line {
    std::string name;
    double min = 0, median = 0, max = 0;
    int count = 0;
    int passes = -1;  // -1: a plain constant, not a verdict row
  };
  std::vector<Line> constants;
  std::vector<Line> inequalities;
};

inline double medianOf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline AggregateTable aggregateReports(const std::vector<json>& docs) {
  if (docs.empty()) throw UnknownName("no instance reports to aggregate");
  std::map<std::string, std::vector<double>> consts;
  std::map<std::string, std::pair<std::vector<double>, int>> ineqs;
  for (const json& d : docs) {
    requireSchema(d, "instance report");
    for (const auto& [name, v] : d.at("constants").items())
      consts[name].push_back(v.get<double>());
    for (const auto& r : d.at("rows")) {
      auto& slot = ineqs[r.at("inequality").get<std::string>()];
      slot.first.push_back(r.at("constant").get<double>());
      slot.second += r.at("verdict") == "pass";
    }
  }
  AggregateTable t;
  for (const auto& [name, vals] : consts) {
    t.constants.push_back({name, *std::min_element(vals.begin(), vals.end()), medianOf(vals),
                           *std::max_element(vals.begin(), vals.end()),
                           static_cast<int>(vals.size()), -1});
  }
  for (const auto& [name, slot] : ineqs) {
    const auto& vals = slot.first;
    t.inequalities.push_back({name, *std::min_element(vals.begin(), vals.end()),
                              medianOf(vals), *std::max_element(vals.begin(), vals.end()),
                              static_cast<int>(vals.size()), slot.second});
  }
  return t;
}

inline std::vector<std::string> aggregateCsv(const AggregateTable& t) {
  std::vector<std::string> rows;
  for (const auto& l : t.inequalities)
    rows.push_back("inequality," + l.name + "," + formatNumber(l.min) + "," +
                   formatNumber(l.median) + "," + formatNumber(l.max) + "," +
                   std::to_string(l.passes) + "," + std::to_string(l.count));
  for (const auto& l : t.constants)
    rows.push_back("constant," + l.name + "," + formatNumber(l.min) + "," +
                   formatNumber(l.median) + "," + formatNumber(l.max) + ",," +
                   std::to_string(l.count));
  return rows;
}

inline constexpr const char* kAggregateCsvHeader = "kind,name,min,median,max,passes,rows";

inline std::string aggregateText(const AggregateTable& t) {
  char buf[256];
  std::string out;
  const auto line = [&](const AggregateTable::Line& l, bool verdict) {
    if (verdict)
      std::snprintf(buf, sizeof(buf), "  %-28s %12.5g %12.5g %12.5g   %d/%d pass\n",
                    l.name.c_str(), l.min, l.median, l.max, l.passes, l.count);
    else
      std::snprintf(buf, sizeof(buf), "  %-28s %12.5g %12.5g %12.5g\n", l.name.c_str(), l.min,
                    l.median, l.max);
    out += buf;
  };
  out += "inequalities (constant column: min / median / max over instances)\n";
  for (const auto& l : t.inequalities) line(l, true);
  out += "constants\n";
  for (const auto& l : t.constants) line(l, false);
  return out;
}

}  // namespace malab
