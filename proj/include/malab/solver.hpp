#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "ma_problem.hpp"
#include "subdifferential.hpp"

namespace malab {

struct MASolution {
  PLConvexFunction u;      // boundary values exactly 0, gradients = cell centroids
  double residual = 0;     // max_i |V_i - mu_i| / mu_i at return
  int iterations = 0;      // Newton steps (lifting sweeps count as steps too)
  CellField cells;         // final subdifferential decomposition
};

namespace detail {

struct ResidualEval {
  CellField cells;
  double linf = 0;  // max relative mismatch
  double l2 = 0;    // l2 norm of the relative mismatch vector
  bool allNonempty = true;
};

inline ResidualEval evaluate(const PLConvexFunction& u, const std::vector<double>& mu) {
  ResidualEval r;
  r.cells = computeCells(u);
  const int nI = u.nInterior;
  for (int i = 0; i < nI; ++i) {
    if (!r.cells.nonempty[i]) r.allNonempty = false;
    const double rel = (r.cells.area[i] - mu[i]) / mu[i];
    r.linf = std::max(r.linf, std::abs(rel));
    r.l2 += rel * rel;
  }
  r.l2 = std::sqrt(r.l2);
  return r;
}

}  // namespace detail

// Damped Newton for the subdifferential-measure matching problem
// |cell_i(u)| = mu_i: the Jacobian of the cell volumes is the (symmetric,
// negative semidefinite) power-diagram face matrix, so each step solves one
// SPD system. Armijo backtracking with cell-positivity guard; on a stall the
// solver falls back to sequential per-node lifting sweeps before giving up.
inline MASolution solve(const MAProblem& problem, double tol = 1e-6, int maxIter = 500) {
  const int nI = problem.grid.nInterior;
  if (nI < 16) throw InfeasibleMass("grid too coarse: fewer than 16 interior nodes");

  PLConvexFunction u = problem.grid;

  // initialization: paraboloid c (|x - xc|^2 - R^2), mass matched in total
  const Vec2 xc = u.domain.centroid();
  double R2 = 0;
  for (size_t i = u.nInterior; i < u.nodes.size(); ++i)
    R2 = std::max(R2, sqnorm(u.nodes[i] - xc));
  const double c0 = 0.5 * std::sqrt(problem.totalMass() / u.domain.volume());
  for (int i = 0; i < nI; ++i) u.values[i] = c0 * (sqnorm(u.nodes[i] - xc) - R2);

  auto eval = detail::evaluate(u, problem.mu);
  int iterations = 0;
  int stall = 0;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol;
  std::vector<Eigen::Triplet<double>> trips;

  while (eval.linf > tol && iterations < maxIter && stall < 50) {
    ++iterations;
    // assemble -J = graph Laplacian of face weights + boundary couplings
    trips.clear();
    std::vector<double> diag(nI, 0.0);
    for (int i = 0; i < nI; ++i) {
      for (const auto& [j, len] : eval.cells.faces[i]) {
        const double w = len / norm(u.nodes[j] - u.nodes[i]);
        diag[i] += w;
        if (j < nI) trips.emplace_back(i, j, -w);
      }
      // nodes with empty cells have no faces; give the row a unit so the
      // factorization stays nonsingular (the step just lowers that node)
      if (diag[i] == 0.0) diag[i] = 1.0;
    }
    for (int i = 0; i < nI; ++i) trips.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> A(nI, nI);
    A.setFromTriplets(trips.begin(), trips.end());
    chol.compute(A);
    if (chol.info() != Eigen::Success)
      throw NoConvergence("Jacobian factorization failed at iteration " +
                          std::to_string(iterations));

    Eigen::VectorXd F(nI);
    for (int i = 0; i < nI; ++i)
      F[i] = eval.cells.nonempty[i] ? (eval.cells.area[i] - problem.mu[i])
                                    : -problem.mu[i];
    const Eigen::VectorXd step = chol.solve(F);

    // Armijo backtracking on the l2 residual, with the convexity guard that
    // every cell stays nonempty
    const double base = eval.l2;
    double alpha = 1.0;
    bool accepted = false;
    PLConvexFunction trial = u;
    for (int halve = 0; halve <= 30; ++halve, alpha *= 0.5) {
      for (int i = 0; i < nI; ++i) trial.values[i] = u.values[i] + alpha * step[i];
      const auto trialEval = detail::evaluate(trial, problem.mu);
      if (!trialEval.allNonempty) continue;
      if (trialEval.l2 <= (1.0 - 1e-4 * alpha) * base) {
        u.values = trial.values;
        eval = trialEval;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Newton stalled: one sweep of sequential lifting (per-node 1d Newton
      // on its own cell volume), the Oliker-Prussner style fallback
      ++stall;
      bool moved = false;
      for (int i = 0; i < nI; ++i) {
        double w = 0;
        for (const auto& [j, len] : eval.cells.faces[i])
          w += len / norm(u.nodes[j] - u.nodes[i]);
        if (w <= 0) {
          // empty cell: lower the node toward the convex minorant
          u.values[i] -= 0.5 * u.grid.h * u.grid.h;
          moved = true;
          continue;
        }
        const double delta = (eval.cells.area[i] - problem.mu[i]) / w;
        if (delta != 0) moved = true;
        u.values[i] += 0.7 * delta;  // damped to keep sweeps stable
      }
      if (!moved) break;
      eval = detail::evaluate(u, problem.mu);
    } else {
      stall = 0;
    }
  }

  if (eval.linf > tol)
    throw NoConvergence("residual " + std::to_string(eval.linf) + " after " +
                        std::to_string(iterations) + " iterations");

  MASolution sol;
  computeCellGradients(u, eval.cells);
  computeHessianField(u);
  sol.u = std::move(u);
  sol.residual = eval.linf;
  sol.iterations = iterations;
  sol.cells = std::move(eval.cells);
  return sol;
}

}  // namespace malab
