#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "malab/experiment.hpp"
#include "malab/parallel.hpp"

namespace fs = std::filesystem;
using namespace malab;

namespace {

struct CommonFlags {
  std::string config;
  std::string input;
  std::string output;
  int grid = 0;
  long long seed = -1;
  std::vector<int> kRange;
  std::string outDir;
  int samples = 100;
  int jobs = 0;
};

ExperimentConfig loadConfig(const CommonFlags& fl) {
  ExperimentConfig cfg = ExperimentConfig::fromJson(readJsonFile(fl.config));
  if (fl.grid > 0) cfg.h = 2.0 / fl.grid;
  if (fl.seed >= 0) {
    cfg.f.seed = static_cast<std::uint64_t>(fl.seed);
    cfg.seeds = {cfg.f.seed};
  }
  if (!fl.kRange.empty()) cfg.kRange = fl.kRange;
  if (!fl.outDir.empty()) cfg.outDir = fl.outDir;
  return cfg;
}

std::string idFromPath(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  const std::string tag = ".solution";
  if (stem.size() > tag.size() && stem.compare(stem.size() - tag.size(), tag.size(), tag) == 0)
    stem.resize(stem.size() - tag.size());
  return stem.empty() ? "instance" : stem;
}

int cmdSolve(const CommonFlags& fl) {
  ExperimentConfig cfg = loadConfig(fl);
  cfg.stages = {"solve"};
  cfg.validate();
  InstanceState st = makeState(cfg, cfg.seeds.front());
  runStageOn(st, "solve");
  const std::string out = fl.output.empty() ? "solution.json" : fl.output;
  writeJsonFile(out, solutionToJson(st.out.sol.u, st.out.sol.residual, st.out.sol.iterations,
                                    st.out.spec));
  std::printf("%s: residual %.3g, %d iterations -> %s\n", st.out.id.c_str(),
              st.out.sol.residual, st.out.sol.iterations, out.c_str());
  return 0;
}

int cmdAtlas(const CommonFlags& fl, const std::string& overlapOut) {
  const LoadedSolution ls = solutionFromJson(readJsonFile(fl.input));
  InstanceState st = stateFromSolution(ls, idFromPath(fl.input), fl.samples, {0, 1, 2});
  runStageOn(st, "atlas");
  const std::string out = fl.output.empty() ? "atlas.json" : fl.output;
  writeJsonFile(out, atlasToJson(st.out.atlas));
  if (!overlapOut.empty()) {
    std::vector<std::string> lines;
    for (size_t i = 0; i < st.out.atlasCover.overlap.size(); ++i)
      lines.push_back(std::to_string(i) + "," + std::to_string(st.out.atlasCover.overlap[i]));
    writeCsvFile(overlapOut, "node_id,overlap_count", lines);
  }
  std::printf("%s: rho %.6g, theta %.4g, K %.4g -> %s\n", st.out.id.c_str(), st.out.atlas.rho,
              st.out.atlas.theta, st.out.atlas.K, out.c_str());
  return st.out.failedRows() ? 4 : 0;
}

int cmdVerify(const CommonFlags& fl, const std::string& lemma) {
  static const std::vector<std::string> lemmas{"hessmean", "hesssupermean", "levelsets", "main",
                                               "reg"};
  if (std::find(lemmas.begin(), lemmas.end(), lemma) == lemmas.end())
    throw UnknownName("lemma '" + lemma + "'");
  const LoadedSolution ls = solutionFromJson(readJsonFile(fl.input));
  InstanceState st = stateFromSolution(ls, idFromPath(fl.input), fl.samples,
                                       fl.kRange.empty() ? std::vector<int>{0, 1, 2}
                                                         : fl.kRange);
  runStageOn(st, lemma);
  std::vector<std::string> rows;
  for (const auto& r : st.out.rows) rows.push_back(csvLine(r));
  const std::string out = fl.output.empty() ? "report.csv" : fl.output;
  writeCsvFile(out, kReportCsvHeader, rows);
  const int failed = st.out.failedRows();
  std::printf("%s: %zu rows, %d failed -> %s\n", st.out.id.c_str(), st.out.rows.size(), failed,
              out.c_str());
  return failed ? 4 : 0;
}

int cmdEstimate(const CommonFlags& fl) {
  const LoadedSolution ls = solutionFromJson(readJsonFile(fl.input));
  const std::vector<int> ks = fl.kRange.empty() ? std::vector<int>{0, 1, 2} : fl.kRange;
  json entries = json::array();
  bool bad = false;
  for (int k : ks) {
    const MainReport mr = verifyMain(ls.u, k);
    entries.push_back({{"k", k},
                       {"lhs", mr.lhs},
                       {"rhs", mr.rhs},
                       {"ratio", mr.ratio},
                       {"agreement", mr.cake.agreement()},
                       {"decomposition_ok", mr.decompositionOk}});
    bad = bad || !mr.decompositionOk || !(mr.ratio <= kMainBudget) ||
          mr.cake.agreement() > kLayerCakeTol;
    std::printf("k=%d: I_%d(U/2) = %.6g <= C * I_%d(3U/4) = C * %.6g, C = %.4g\n", k, k + 1,
                mr.lhs, k, mr.rhs, mr.ratio);
  }
  const json doc{{"schema", kSchema}, {"instance", idFromPath(fl.input)}, {"estimates", entries}};
  if (!fl.output.empty()) writeJsonFile(fl.output, doc);
  return bad ? 4 : 0;
}

std::vector<std::string> reportFilesFrom(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  const auto endsWith = [](const std::string& s, const std::string& tag) {
    return s.size() >= tag.size() && s.compare(s.size() - tag.size(), tag.size(), tag) == 0;
  };
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && endsWith(e.path().filename().string(), ".report.json"))
          found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (endsWith(in, ".report.json")) {
      files.push_back(in);
    } else {
      // treat as a manifest: its digest keys name the sibling reports
      const json man = readJsonFile(in);
      requireSchema(man, "manifest '" + in + "'");
      const fs::path dir = fs::path(in).parent_path();
      for (const auto& [name, _] : man.at("digests").items())
        if (endsWith(name, ".report.json")) files.push_back((dir / name).string());
    }
  }
  return files;
}

int cmdReport(const std::vector<std::string>& inputs, const std::string& format,
              const std::string& output) {
  const std::vector<std::string> files = reportFilesFrom(inputs);
  if (files.empty()) throw UnknownName("no instance reports found under the given inputs");
  std::vector<json> docs;
  for (const auto& f : files) docs.push_back(readJsonFile(f));
  const AggregateTable table = aggregateReports(docs);
  if (format == "csv") {
    const std::vector<std::string> rows = aggregateCsv(table);
    if (output.empty()) {
      std::printf("%s\n", kAggregateCsvHeader);
      for (const auto& r : rows) std::printf("%s\n", r.c_str());
    } else {
      writeCsvFile(output, kAggregateCsvHeader, rows);
    }
  } else if (format == "table") {
    const std::string text = aggregateText(table);
    if (output.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      std::ofstream outFile(output);
      if (!outFile) throw UnknownName("cannot write '" + output + "'");
      outFile << text;
    }
  } else {
    throw UnknownName("report format '" + format + "'");
  }
  return 0;
}

int cmdRun(const CommonFlags& fl) {
  const ExperimentConfig cfg = loadConfig(fl);
  const json manifest = run(cfg);
  const int failed = manifest.at("failed_rows").get<int>();
  std::printf("%d instance(s) -> %s (config %s), %d failed row(s)\n",
              manifest.at("instances").get<int>(), cfg.outDir.c_str(),
              manifest.at("config_hash").get<std::string>().c_str(), failed);
  return failed ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ma-lab: a numerical laboratory for the Dirichlet Monge-Ampere equation\n"
               "and the section geometry behind interior W^{2,1} estimates"};
  app.require_subcommand(1);
  CommonFlags fl;
  std::string lemma, overlapOut, format = "table";
  std::vector<std::string> reportInputs;

  const auto addJobs = [&](CLI::App* sc) {
    sc->add_option("-j,--jobs", fl.jobs, "worker threads (default: MA_LAB_JOBS or all cores)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one instance from a config");
  solve->add_option("-c,--config", fl.config, "experiment config JSON")->required();
  solve->add_option("-o,--out", fl.output, "solution JSON path (default solution.json)");
  solve->add_option("--grid", fl.grid, "override lattice count n (h = 2/n)");
  solve->add_option("--seed", fl.seed, "override density seed");
  addJobs(solve);

  CLI::App* atlas = app.add_subcommand("atlas", "section atlas of a solved instance");
  atlas->add_option("-i,--in", fl.input, "solution JSON")->required();
  atlas->add_option("-o,--out", fl.output, "atlas JSON path (default atlas.json)");
  atlas->add_option("--overlap", overlapOut, "also write the cover overlap CSV here");
  atlas->add_option("--samples", fl.samples, "section centers to sample (default 100)");
  addJobs(atlas);

  CLI::App* verify = app.add_subcommand("verify", "verify one lemma on a solved instance");
  verify->add_option("--lemma", lemma, "hessmean | hesssupermean | levelsets | main | reg")
      ->required();
  verify->add_option("-i,--in", fl.input, "solution JSON")->required();
  verify->add_option("-o,--out", fl.output, "report CSV path (default report.csv)");
  verify->add_option("--samples", fl.samples, "section centers to sample (default 100)");
  verify->add_option("--k", fl.kRange, "k exponents for main/reg (default 0 1 2)");
  addJobs(verify);

  CLI::App* estimate = app.add_subcommand("estimate", "L log^k L interior integrals");
  estimate->add_option("-i,--in", fl.input, "solution JSON")->required();
  estimate->add_option("--k", fl.kRange, "k exponents (default 0 1 2)");
  estimate->add_option("-o,--out", fl.output, "also write the estimates as JSON");
  addJobs(estimate);

  CLI::App* report = app.add_subcommand("report", "aggregate instance reports");
  report->add_option("-i,--in", reportInputs,
                     "run directories, manifests, or *.report.json files")
      ->required();
  report->add_option("--format", format, "table | csv (default table)");
  report->add_option("-o,--out", fl.output, "write instead of printing");

  CLI::App* runCmd = app.add_subcommand("run", "full pipeline over the configured seeds");
  runCmd->add_option("-c,--config", fl.config, "experiment config JSON")->required();
  runCmd->add_option("-o,--out", fl.outDir, "output directory (overrides config)");
  runCmd->add_option("--grid", fl.grid, "override lattice count n (h = 2/n)");
  runCmd->add_option("--seed", fl.seed, "run a single seed");
  runCmd->add_option("--k", fl.kRange, "override k exponents");
  addJobs(runCmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (fl.jobs > 0) setJobs(fl.jobs);
  try {
    if (solve->parsed()) return cmdSolve(fl);
    if (atlas->parsed()) return cmdAtlas(fl, overlapOut);
    if (verify->parsed()) return cmdVerify(fl, lemma);
    if (estimate->parsed()) return cmdEstimate(fl);
    if (report->parsed()) return cmdReport(reportInputs, format, fl.output);
    if (runCmd->parsed()) return cmdRun(fl);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ma-lab: %s\n", e.what());
    return exitCodeFor(e);
  }
  return 2;
}
