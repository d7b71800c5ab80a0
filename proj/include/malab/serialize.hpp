#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "grid_function.hpp"
#include "ma_problem.hpp"
#include "subdifferential.hpp"

namespace malab {

using nlohmann::json;

inline constexpr const char* kSchema = "ma-lab/1";

// fixed "%.17g" round-trip formatting; CSV output must not depend on locale
inline std::string formatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void requireSchema(const json& j, const std::string& what) {
  if (!j.contains("schema") || j["schema"] != kSchema)
    throw MixedSchema(what + " does not carry schema \"" + kSchema + "\"");
}

inline json bodyToJson(const Body2& b) {
  json verts = json::array();
  for (const auto& v : b.vertices) verts.push_back({v[0], v[1]});
  return json{{"dim", 2}, {"vertices", verts}, {"schema", kSchema}};
}

inline Body2 bodyFromJson(const json& j) {
  requireSchema(j, "body document");
  if (j.value("dim", 0) != 2) throw MixedSchema("only dim = 2 bodies are supported");
  Polygon p;
  for (const auto& v : j.at("vertices")) p.push_back(vec2(v.at(0), v.at(1)));
  return bodyFromPolygon(p);
}

inline json densityToJson(const DensitySpec& spec) {
  return json{{"kind", spec.kindName()},
              {"lambda", spec.lambda},
              {"Lambda", spec.Lambda},
              {"seed", spec.seed}};
}

inline DensitySpec densityFromJson(const json& j) {
  DensitySpec spec;
  spec.kind = DensitySpec::kindFromName(j.value("kind", "const"));
  spec.lambda = j.value("lambda", 1.0);
  spec.Lambda = j.value("Lambda", spec.lambda);
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

inline json solutionToJson(const PLConvexFunction& u, double residual, int iterations,
                           const DensitySpec& spec) {
  json verts = json::array();
  for (const auto& v : u.domain.vertices) verts.push_back({v[0], v[1]});
  json nodes = json::array();
  for (const auto& p : u.nodes) nodes.push_back({p[0], p[1]});
  return json{{"dim", 2},
              {"vertices", verts},
              {"grid", {{"h", u.grid.h}, {"nodes", nodes}, {"values", u.values}}},
              {"f", densityToJson(spec)},
              {"residual", residual},
              {"iterations", iterations},
              {"schema", kSchema}};
}

struct LoadedSolution {
  PLConvexFunction u;
  DensitySpec spec;
  double residual = 0;
  int iterations = 0;
};

// Rebuilds the grid from the stored domain and step, checks it reproduces the
// stored node list, then recomputes the derived fields (cells, slopes,
// Hessians) from the values.
inline LoadedSolution solutionFromJson(const json& j) {
  requireSchema(j, "solution document");
  if (j.value("dim", 0) != 2) throw MixedSchema("only dim = 2 solutions are supported");

  Polygon p;
  for (const auto& v : j.at("vertices")) p.push_back(vec2(v.at(0), v.at(1)));
  const json& grid = j.at("grid");

  LoadedSolution out;
  out.u = buildGrid(bodyFromPolygon(p), grid.at("h").get<double>());
  const json& nodes = grid.at("nodes");
  if (nodes.size() != out.u.nodes.size())
    throw MixedSchema("stored node list does not match the rebuilt grid (" +
                      std::to_string(nodes.size()) + " vs " +
                      std::to_string(out.u.nodes.size()) + " nodes)");
  for (size_t i = 0; i < out.u.nodes.size(); ++i) {
    const Vec2 q = vec2(nodes[i].at(0), nodes[i].at(1));
    if (norm(q - out.u.nodes[i]) > 1e-9 * (1.0 + out.u.grid.h))
      throw MixedSchema("stored node " + std::to_string(i) + " drifted off the rebuilt grid");
  }
  out.u.values = grid.at("values").get<std::vector<double>>();
  if (out.u.values.size() != out.u.nodes.size())
    throw MixedSchema("value list length does not match the node list");
  if (!isDiscretelyConvex(out.u))
    throw NonConvexInput("stored values are not discretely convex");

  const CellField cells = computeCells(out.u);
  computeCellGradients(out.u, cells);
  computeHessianField(out.u);
  if (j.contains("f")) out.spec = densityFromJson(j["f"]);
  out.residual = j.value("residual", 0.0);
  out.iterations = j.value("iterations", 0);
  return out;
}

inline json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnknownName("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

inline void writeJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw UnknownName("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

// rows of pre-formatted cells; the header goes first
inline void writeCsvFile(const std::string& path, const std::string& header,
                         const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw UnknownName("cannot write '" + path + "'");
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

}  // namespace malab
