#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid_function.hpp"
#include "parallel.hpp"
#include "polygon.hpp"

namespace malab {

// Subdifferential cells of a nodal function: for interior node i the cell is
// {p : p.(x_j - x_i) <= u_j - u_i  for all nodes j}, a convex polygon in
// slope space. For discretely convex u the cells are essentially disjoint
// and |cell_i| is the Monge-Ampere measure of node i.
struct CellField {
  std::vector<double> area;                                // per interior node
  std::vector<Vec2> centroid;                              // of the cell, in slope space
  std::vector<std::vector<std::pair<int, double>>> faces;  // (cutting node id, face length)
  std::vector<char> nonempty;

  double totalArea() const {
    double s = 0;
    for (double a : area) s += a;
    return s;
  }
};

namespace detail {

// One node's cell. The initial slope box is sized from the boundary data
// (every direction is blocked by surrounding boundary constraints), then cut
// by the near lattice ring, then by everything else behind a support-function
// test that skips constraints which cannot touch the current cell.
inline LabeledPolygon subdiffCell(const PLConvexFunction& u, int id, double slack,
                                  double slopeBox) {
  const Vec2 xi = u.nodes[id];
  const double ui = u.values[id];
  const int total = static_cast<int>(u.nodes.size());

  LabeledPolygon cell;
  cell.v = {vec2(-slopeBox, -slopeBox), vec2(slopeBox, -slopeBox), vec2(slopeBox, slopeBox),
            vec2(-slopeBox, slopeBox)};
  cell.label = {-1, -1, -1, -1};

  const double h = u.grid.h;
  const int ci = static_cast<int>(std::llround(xi[0] / h));
  const int cj = static_cast<int>(std::llround(xi[1] / h));
  // near ring first: these do almost all the cutting for interior nodes
  for (int dj = -2; dj <= 2 && !cell.v.empty(); ++dj)
    for (int di = -2; di <= 2 && !cell.v.empty(); ++di) {
      if (di == 0 && dj == 0) continue;
      const int j = u.grid.idAt(ci + di, cj + dj);
      if (j < 0) continue;
      cell = clipLabeled(cell, u.nodes[j] - xi, u.values[j] - ui + slack, j);
    }
  if (cell.v.empty()) return cell;

  Box2 bb = Box2::empty();
  for (const auto& v : cell.v) bb.expand(v);

  for (int j = 0; j < total && !cell.v.empty(); ++j) {
    if (j == id) continue;
    const Vec2 d = u.nodes[j] - xi;
    const double b = u.values[j] - ui + slack;
    // support test: constraint cannot cut the cell's bounding box
    if (bb.support(d) <= b) continue;
    cell = clipLabeled(cell, d, b, j);
    bb = Box2::empty();
    for (const auto& v : cell.v) bb.expand(v);
  }
  return cell;
}

}  // namespace detail

// Global half-width for the initial slope box: boundary constraints pin
// every cell inside a box of this size (clearance >= h/4 by grid
// construction, boundary node spacing <= sqrt(2) h).
inline double slopeBoxHalfWidth(const PLConvexFunction& u) {
  return 16.0 * u.oscillation() / u.grid.h + 1.0;
}

inline CellField computeCells(const PLConvexFunction& u, double slack = 0.0) {
  const int nI = u.nInterior;
  CellField out;
  out.area.assign(nI, 0.0);
  out.centroid.assign(nI, Vec2{});
  out.faces.assign(nI, {});
  out.nonempty.assign(nI, 0);
  const double box = slopeBoxHalfWidth(u);

  std::vector<char> boxTouched(nI, 0);
  parallelFor(nI, [&](int id) {
    const LabeledPolygon cell = detail::subdiffCell(u, id, slack, box);
    if (cell.v.size() < 3) return;
    out.nonempty[id] = 1;
    out.area[id] = polygonArea(cell.v);
    out.centroid[id] = polygonCentroid(cell.v);
    const int m = static_cast<int>(cell.v.size());
    auto& fl = out.faces[id];
    for (int e = 0; e < m; ++e) {
      const int lab = cell.label[e];
      if (lab < 0) {
        boxTouched[id] = 1;
        return;
      }
      const double len = norm(cell.v[(e + 1) % m] - cell.v[e]);
      if (len <= 0) continue;
      bool merged = false;
      for (auto& [j, l] : fl)
        if (j == lab) {
          l += len;
          merged = true;
          break;
        }
      if (!merged) fl.emplace_back(lab, len);
    }
  });
  // cells touching the initial box mean the sizing bound is wrong, which is
  // a bug, not a data condition; surface it loudly (outside the workers)
  for (int id = 0; id < nI; ++id)
    if (boxTouched[id]) throw DegenerateBody("subdifferential cell touched the slope box");
  return out;
}

// Discrete convexity: node i lies on the lower convex hull of the lifted
// graph iff its (slack-relaxed) subdifferential cell is nonempty.
inline bool isDiscretelyConvex(const PLConvexFunction& u, double slack = 1e-8) {
  const CellField cells = computeCells(u, slack);
  for (int i = 0; i < u.nInterior; ++i)
    if (!cells.nonempty[i]) return false;
  return true;
}

// Monge-Ampere measure of a node set: total slope-space volume of the
// subdifferential cells (disjoint up to measure zero for convex u).
inline double maMeasure(const PLConvexFunction& u, const std::vector<int>& nodeSet) {
  const double box = slopeBoxHalfWidth(u);
  double total = 0;
  for (int id : nodeSet) {
    if (!u.isInterior(id)) continue;
    LabeledPolygon cell = detail::subdiffCell(u, id, 0.0, box);
    if (cell.v.size() < 3) {
      // empty at zero slack is fine only if the node is still on the hull
      cell = detail::subdiffCell(u, id, 1e-8, box);
      if (cell.v.size() < 3) throw NonConvexInput("node fell off the lower convex hull");
      continue;  // degenerate cell, measure zero
    }
    total += polygonArea(cell.v);
  }
  return total;
}

// Fill the gradient field with the subdifferential cell centroids (a
// guaranteed element of the subdifferential for each node). Falls back to
// the least-squares slope where the cell is degenerate.
inline void computeCellGradients(PLConvexFunction& u, const CellField& cells) {
  for (int i = 0; i < u.nInterior; ++i) {
    if (cells.nonempty[i]) {
      u.grad[i] = cells.centroid[i];
    } else {
      Mat2 hs;
      Vec2 g{};
      if (quadraticModelAt(u, i, hs, g)) u.grad[i] = g;
    }
  }
}

}  // namespace malab
