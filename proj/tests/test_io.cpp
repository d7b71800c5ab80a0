#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "malab/experiment.hpp"

using namespace malab;
namespace fs = std::filesystem;

namespace {

fs::path freshDir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("malab_io_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

InstanceState solvedInstance(double h, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.domain = "disc";
  cfg.f.kind = DensitySpec::Kind::Random;
  cfg.f.lambda = 0.5;
  cfg.f.Lambda = 2.0;
  cfg.h = h;
  InstanceState st = makeState(cfg, seed);
  runStageOn(st, "solve");
  return st;
}

}  // namespace

TEST_CASE("solution documents survive a disk round trip") {
  InstanceState st = solvedInstance(2.0 / 32, 5);
  const MASolution& sol = st.out.sol;
  const json doc = solutionToJson(sol.u, sol.residual, sol.iterations, st.out.spec);

  const fs::path p = freshDir("rt") / "sol.json";
  writeJsonFile(p.string(), doc);
  const LoadedSolution ls = solutionFromJson(readJsonFile(p.string()));

  REQUIRE(ls.u.values.size() == sol.u.values.size());
  for (size_t i = 0; i < ls.u.values.size(); ++i)
    REQUIRE(ls.u.values[i] == sol.u.values[i]);  // shortest-round-trip doubles are exact

  REQUIRE(ls.residual == sol.residual);
  REQUIRE(ls.iterations == sol.iterations);
  REQUIRE(ls.spec.kind == st.out.spec.kind);
  REQUIRE(ls.spec.lambda == st.out.spec.lambda);
  REQUIRE(ls.spec.Lambda == st.out.spec.Lambda);
  REQUIRE(ls.spec.seed == st.out.spec.seed);

  // derived fields are rebuilt from the values, not stored: they must agree
  // exactly with the solver's own fit
  REQUIRE(ls.u.grad.size() == sol.u.grad.size());
  for (size_t i = 0; i < ls.u.grad.size(); ++i)
    REQUIRE(norm(ls.u.grad[i] - sol.u.grad[i]) == 0.0);
  REQUIRE(ls.u.hessKnown == sol.u.hessKnown);

  const Vec2 probe = vec2(0.17, -0.23);
  REQUIRE(ls.u.interpolate(probe) == sol.u.interpolate(probe));
}

TEST_CASE("solution parsing rejects foreign or damaged documents") {
  InstanceState st = solvedInstance(2.0 / 16, 1);
  const json doc =
      solutionToJson(st.out.sol.u, st.out.sol.residual, st.out.sol.iterations, st.out.spec);

  SECTION("wrong schema tag") {
    json bad = doc;
    bad["schema"] = "ma-lab/2";
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("missing schema tag") {
    json bad = doc;
    bad.erase("schema");
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("wrong dimension") {
    json bad = doc;
    bad["dim"] = 3;
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("grid step disagrees with the stored nodes") {
    json bad = doc;
    bad["grid"]["h"] = doc["grid"]["h"].get<double>() * 2;
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("node dropped from the list") {
    json bad = doc;
    bad["grid"]["nodes"].erase(0);
    bad["grid"]["values"].erase(0);
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("value list length mismatch") {
    json bad = doc;
    bad["grid"]["values"].erase(0);
    REQUIRE_THROWS_AS(solutionFromJson(bad), MixedSchema);
  }
  SECTION("values that are not convex") {
    json bad = doc;
    bad["grid"]["values"][0] = 1.0;  // interior node above the zero boundary
    REQUIRE_THROWS_AS(solutionFromJson(bad), NonConvexInput);
  }
}

TEST_CASE("config documents parse with grid and seed shorthands") {
  SECTION("lattice count and stage subset") {
    const json j = {{"domain", "quadratic_disc"}, {"grid", 64}, {"stages", {"solve", "hessmean"}}};
    const ExperimentConfig cfg = ExperimentConfig::fromJson(j);
    REQUIRE(cfg.h == 2.0 / 64);
    REQUIRE(cfg.stages == std::vector<std::string>{"solve", "hessmean"});
    REQUIRE_NOTHROW(cfg.validate());
    REQUIRE(instanceId(cfg, 0) == "quadratic_disc-const-s0-n64");
  }
  SECTION("grid below one is a step size") {
    const json j = {{"domain", "disc"}, {"grid", 0.03125}};
    REQUIRE(ExperimentConfig::fromJson(j).h == 0.03125);
  }
  SECTION("seed count expands to a range") {
    const json j = {{"domain", "disc"}, {"seeds", 3}};
    REQUIRE(ExperimentConfig::fromJson(j).seeds ==
            std::vector<std::uint64_t>{0, 1, 2});
  }
  SECTION("explicit seed list and k list") {
    const json j = {{"domain", "disc"}, {"seeds", {4, 9}}, {"k", {0, 2}}};
    const ExperimentConfig cfg = ExperimentConfig::fromJson(j);
    REQUIRE(cfg.seeds == std::vector<std::uint64_t>{4, 9});
    REQUIRE(cfg.kRange == std::vector<int>{0, 2});
  }
  SECTION("scalar k") {
    const json j = {{"domain", "disc"}, {"k", 1}};
    REQUIRE(ExperimentConfig::fromJson(j).kRange == std::vector<int>{1});
  }
  SECTION("custom polygon domain") {
    const json j = {{"domain", {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}}, {"grid", 16}};
    const ExperimentConfig cfg = ExperimentConfig::fromJson(j);
    REQUIRE(cfg.domain == "custom");
    REQUIRE(cfg.customDomain.size() == 4);
    REQUIRE_NOTHROW(cfg.validate());
  }
}

TEST_CASE("config validation rejects bad experiments") {
  ExperimentConfig cfg;
  cfg.domain = "disc";

  SECTION("lambda above Lambda") {
    cfg.f.lambda = 3.0;
    cfg.f.Lambda = 1.0;
    REQUIRE_THROWS_AS(cfg.validate(), InfeasibleMass);
  }
  SECTION("grid step too coarse") {
    cfg.h = 2.0 / 3;
    REQUIRE_THROWS_AS(cfg.validate(), InfeasibleMass);
  }
  SECTION("verification stage before solve") {
    cfg.stages = {"atlas", "solve"};
    REQUIRE_THROWS_AS(cfg.validate(), UnknownName);
  }
  SECTION("unknown stage name") {
    cfg.stages = {"solve", "bogus"};
    REQUIRE_THROWS_AS(cfg.validate(), UnknownName);
  }
  SECTION("duplicate stage") {
    cfg.stages = {"solve", "main", "main"};
    REQUIRE_THROWS_AS(cfg.validate(), UnknownName);
  }
  SECTION("k out of range") {
    cfg.kRange = {9};
    REQUIRE_THROWS_AS(cfg.validate(), InfeasibleMass);
  }
  SECTION("unknown domain") {
    cfg.domain = "torus";
    REQUIRE_THROWS_AS(cfg.validate(), UnknownName);
  }
}

TEST_CASE("a run writes a deterministic artifact set") {
  ExperimentConfig cfg;
  cfg.domain = "quadratic_disc";
  cfg.h = 2.0 / 32;
  cfg.stages = {"solve", "atlas", "main"};
  cfg.samples = 40;
  cfg.seeds = {0};

  const fs::path a = freshDir("runA");
  const fs::path b = freshDir("runB");
  cfg.outDir = a.string();
  const json m1 = run(cfg);
  cfg.outDir = b.string();
  const json m2 = run(cfg);

  REQUIRE(m1["config_hash"] == m2["config_hash"]);
  REQUIRE(m1["digests"] == m2["digests"]);
  REQUIRE(m1["failed_rows"].get<int>() == 0);

  const std::string id = "quadratic_disc-const-s0-n32";
  for (const char* name : {"manifest.json", "report.csv"})
    REQUIRE(fs::exists(a / name));
  for (const char* suffix : {".solution.json", ".atlas.json", ".overlap.csv", ".report.json"})
    REQUIRE(fs::exists(a / (id + suffix)));

  REQUIRE(slurp(a / "report.csv") == slurp(b / "report.csv"));

  // the per-instance report aggregates cleanly
  const std::vector<json> docs = {readJsonFile((a / (id + ".report.json")).string())};
  const AggregateTable table = aggregateReports(docs);
  bool sawRho = false, sawHess = false;
  for (const auto& line : table.constants) sawRho |= line.name == "rho";
  for (const auto& line : table.inequalities) sawHess |= line.name == "main_k0";
  REQUIRE(sawRho);
  REQUIRE(sawHess);
  for (const auto& line : table.inequalities) {
    REQUIRE(line.count == 1);
    REQUIRE(line.passes == 1);
  }
}

TEST_CASE("aggregation guards its inputs") {
  SECTION("no documents") {
    REQUIRE_THROWS_AS(aggregateReports({}), UnknownName);
  }
  SECTION("foreign schema") {
    const json doc = {{"schema", "other/9"}};
    REQUIRE_THROWS_AS(aggregateReports({doc}), MixedSchema);
  }
  SECTION("median and pass counts over synthetic documents") {
    auto mk = [](double value, bool pass) {
      return json{{"schema", kSchema},
                  {"instance", "x"},
                  {"constants", {{"a", value}}},
                  {"rows", json::array({{{"inequality", "band"},
                                         {"lhs", value},
                                         {"rhs", 2 * value},
                                         {"constant", value},
                                         {"verdict", pass ? "pass" : "fail"}}})}};
    };
    const AggregateTable t = aggregateReports({mk(1.0, true), mk(3.0, false)});
    REQUIRE(t.constants.size() == 1);
    REQUIRE(t.constants[0].name == "a");
    REQUIRE(t.constants[0].min == 1.0);
    REQUIRE(t.constants[0].median == 2.0);
    REQUIRE(t.constants[0].max == 3.0);
    REQUIRE(t.inequalities.size() == 1);
    REQUIRE(t.inequalities[0].count == 2);
    REQUIRE(t.inequalities[0].passes == 1);

    const std::vector<std::string> csv = aggregateCsv(t);
    REQUIRE(csv.size() == 2);
    REQUIRE(csv[0] == "inequality,band,1,2,3,1,2");
    REQUIRE(csv[1] == "constant,a,1,2,3,,2");
    const std::string txt = aggregateText(t);
    REQUIRE(txt.find("band") != std::string::npos);
    REQUIRE(txt.find("1/2 pass") != std::string::npos);
  }
}

TEST_CASE("csv numbers use a fixed locale-free format") {
  REQUIRE(formatNumber(0.5) == "0.5");
  REQUIRE(formatNumber(-3.0) == "-3");
  REQUIRE(formatNumber(1.0 / 3) == "0.33333333333333331");

  ReportRow r{"inst", "ineq", 0.5, 2.0, 0.25, true};
  REQUIRE(csvLine(r) == "inst,ineq,0.5,2,0.25,pass");
}
