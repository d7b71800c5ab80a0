#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "malab/experiment.hpp"

using namespace malab;
namespace fs = std::filesystem;

namespace {

fs::path freshDir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("malab_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int runCli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(MA_LAB_BIN) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

void writeConfig(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("run pipeline writes artifacts and repeats bit-identically") {
  const fs::path dir = freshDir("run");
  const json cfg = {{"domain", "quadratic_disc"},
                    {"grid", 24},
                    {"stages", {"solve", "atlas", "main"}},
                    {"samples", 30}};
  writeConfig(dir / "config.json", cfg);

  REQUIRE(runCli("run -c " + (dir / "config.json").string() + " -o " + (dir / "a").string(),
                 dir) == 0);
  REQUIRE(runCli("run -c " + (dir / "config.json").string() + " -o " + (dir / "b").string(),
                 dir) == 0);

  const std::string id = "quadratic_disc-const-s0-n24";
  for (const char* name : {"manifest.json", "report.csv"}) REQUIRE(fs::exists(dir / "a" / name));
  for (const char* suffix : {".solution.json", ".atlas.json", ".overlap.csv", ".report.json"})
    REQUIRE(fs::exists(dir / "a" / (id + suffix)));

  const json ma = readJsonFile((dir / "a" / "manifest.json").string());
  const json mb = readJsonFile((dir / "b" / "manifest.json").string());
  REQUIRE(ma["digests"] == mb["digests"]);
  REQUIRE(ma["config_hash"] == mb["config_hash"]);
  REQUIRE(ma["failed_rows"].get<int>() == 0);
  REQUIRE(slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv"));

  SECTION("report aggregates the run directory in both formats") {
    REQUIRE(runCli("report -i " + (dir / "a").string() + " --format csv -o " +
                       (dir / "agg.csv").string(),
                   dir) == 0);
    const std::string csv = slurp(dir / "agg.csv");
    REQUIRE(csv.rfind(kAggregateCsvHeader, 0) == 0);
    REQUIRE(csv.find("main_k0") != std::string::npos);

    REQUIRE(runCli("report -i " + (dir / "a" / "manifest.json").string() + " --format table",
                   dir) == 0);
    REQUIRE(slurp(dir / "stdout.txt").find("constants") != std::string::npos);

    REQUIRE(runCli("report -i " + (dir / "a").string() + " --format yaml", dir) == 2);
  }
}

TEST_CASE("config validation failures exit with code 2 before any stage") {
  const fs::path dir = freshDir("badcfg");
  writeConfig(dir / "config.json",
              {{"domain", "disc"}, {"grid", 24}, {"f", {{"kind", "const"}, {"lambda", 3.0}, {"Lambda", 1.0}}}});
  REQUIRE(runCli("run -c " + (dir / "config.json").string() + " -o " + (dir / "out").string(),
                 dir) == 2);
  REQUIRE_FALSE(fs::exists(dir / "out" / "manifest.json"));

  writeConfig(dir / "stage.json", {{"domain", "disc"}, {"grid", 24}, {"stages", {"atlas", "solve"}}});
  REQUIRE(runCli("run -c " + (dir / "stage.json").string(), dir) == 2);

  REQUIRE(runCli("run -c " + (dir / "missing.json").string(), dir) == 2);
  REQUIRE(runCli("run --no-such-flag", dir) == 2);
}

TEST_CASE("solve, verify and estimate chain through solution files") {
  const fs::path dir = freshDir("chain");
  writeConfig(dir / "config.json", {{"domain", "quadratic_disc"}, {"grid", 24}});
  const std::string sol = (dir / "sol.json").string();

  REQUIRE(runCli("solve -c " + (dir / "config.json").string() + " -o " + sol, dir) == 0);
  REQUIRE(fs::exists(sol));
  const json doc = readJsonFile(sol);
  REQUIRE(doc["schema"] == kSchema);
  REQUIRE(doc["residual"].get<double>() <= 1e-6);

  SECTION("verify writes the report csv") {
    const std::string csvPath = (dir / "hm.csv").string();
    REQUIRE(runCli("verify --lemma hessmean -i " + sol + " -o " + csvPath + " --samples 30",
                   dir) == 0);
    const std::string csv = slurp(csvPath);
    REQUIRE(csv.rfind(kReportCsvHeader, 0) == 0);
    REQUIRE(csv.find(",hessmean,") != std::string::npos);
    REQUIRE(csv.find(",fail") == std::string::npos);
  }
  SECTION("verify rejects unknown lemmas") {
    REQUIRE(runCli("verify --lemma bogus -i " + sol, dir) == 2);
  }
  SECTION("verify rejects damaged solutions") {
    json bad = doc;
    bad["grid"]["values"][0] = 1.0;
    writeConfig(dir / "bad.json", bad);
    REQUIRE(runCli("verify --lemma hessmean -i " + (dir / "bad.json").string(), dir) == 2);
  }
  SECTION("estimate prints the interior integral chain") {
    REQUIRE(runCli("estimate -i " + sol + " --k 0 --k 1", dir) == 0);
    const std::string out = slurp(dir / "stdout.txt");
    REQUIRE(out.find("I_1") != std::string::npos);
  }
  SECTION("atlas emits section constants") {
    REQUIRE(runCli("atlas -i " + sol + " -o " + (dir / "atlas.json").string() + " --samples 30",
                   dir) == 0);
    const json atlas = readJsonFile((dir / "atlas.json").string());
    REQUIRE(atlas["schema"] == kSchema);
    REQUIRE(atlas["rho"].get<double>() > 0);
    REQUIRE(atlas["K"].get<double>() > 0);
  }
}

TEST_CASE("report refuses an empty input set") {
  const fs::path dir = freshDir("empty");
  fs::create_directories(dir / "none");
  REQUIRE(runCli("report -i " + (dir / "none").string(), dir) == 2);
}
