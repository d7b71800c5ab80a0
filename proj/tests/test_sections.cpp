#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "malab/atlas.hpp"
#include "malab/catalog.hpp"
#include "malab/covering.hpp"
#include "malab/maximal.hpp"
#include "malab/sections.hpp"

using namespace malab;

namespace {

int nodeNear(const PLConvexFunction& u, const Vec2& p) {
  int best = -1;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.nInterior; ++i)
    if (sqnorm(u.nodes[i] - p) < d) {
      d = sqnorm(u.nodes[i] - p);
      best = i;
    }
  REQUIRE(best >= 0);
  return best;
}

}  // namespace

TEST_CASE("sections of the quadratic are exactly the lattice balls") {
  const double h = 2.0 / 64;
  auto e = analyticCatalog("quadratic_disc", h);
  const int id = nodeNear(e.u, vec2(0.25, 0.125));
  const Vec2 x = e.u.nodes[id];
  const double t = 0.02;
  const double r = std::sqrt(2 * t);
  auto s = section(e.u, id, t);
  CHECK_FALSE(s.touchesBoundary);
  // membership <=> |z - x| <= sqrt(2t), checked on every node away from ties
  std::vector<char> inside(e.u.nodes.size(), 0);
  for (int z : s.nodes) inside[z] = 1;
  for (size_t z = 0; z < e.u.nodes.size(); ++z) {
    const double gap = 0.5 * sqnorm(e.u.nodes[z] - x) - t;
    if (std::abs(gap) < 1e-9) continue;
    CHECK(inside[z] == (gap < 0));
  }
  for (const auto& v : s.hull) CHECK(norm(v - x) <= r + 1e-12);
  CHECK(polygonArea(s.hull) >= pi() * 2 * t * (1 - 4 * h / r));
  CHECK(polygonContains(s.hull, x, 1e-12));
}

TEST_CASE("sections of the anisotropic quadratic are the predicted ellipses") {
  const double h = 2.0 / 96;
  auto e = analyticCatalog("anisotropic_quadratic", h, 4.0);
  const int id = nodeNear(e.u, vec2(0, 0));
  REQUIRE(norm(e.u.nodes[id]) < 1e-12);
  const double t = 0.05;
  auto s = section(e.u, id, t);
  // semi-axes sqrt(t/2) and sqrt(8t) for u = (4 x1^2 + x2^2/4)/2 + const
  const double a1 = std::sqrt(t / 2), a2 = std::sqrt(8 * t);
  double m1 = 0, m2 = 0;
  for (int z : s.nodes) {
    m1 = std::max(m1, std::abs(e.u.nodes[z][0]));
    m2 = std::max(m2, std::abs(e.u.nodes[z][1]));
    const Vec2 z2 = e.u.nodes[z];
    CHECK(4 * z2[0] * z2[0] + z2[1] * z2[1] / 4 <= 2 * t + 1e-12);
  }
  CHECK(m1 >= a1 - h);
  CHECK(m2 >= a2 - h);
  CHECK(polygonArea(s.hull) == Catch::Approx(pi() * a1 * a2).epsilon(0.15));
}

TEST_CASE("zero-height section with a strict subgradient is the center alone") {
  const double h = 0.125;
  auto g = buildGrid(discDomain(1.0, h), h);
  int apex = -1;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    g.values[i] = norm(g.nodes[i]) + 0.1 * g.nodes[i][0] - 1.0;
    if (i < static_cast<size_t>(g.nInterior) && norm(g.nodes[i]) < 1e-12)
      apex = static_cast<int>(i);
  }
  REQUIRE(apex >= 0);
  g.grad.assign(g.nInterior, Vec2{});
  g.grad[apex] = vec2(0.1, 0.0);  // strictly inside the subdifferential
  auto s = section(g, apex, 0.0);
  CHECK(s.nodes.size() == 1);
  CHECK(s.nodes[0] == apex);
}

TEST_CASE("dilation is an exact homothety and heights are nested") {
  const double h = 2.0 / 64;
  auto e = analyticCatalog("quadratic_disc", h);
  const int id = nodeNear(e.u, vec2(-0.2, 0.3));
  auto s = section(e.u, id, 0.015);
  auto same = dilate(s, 1.0);
  REQUIRE(same.size() == s.hull.size());
  for (size_t i = 0; i < same.size(); ++i) CHECK(norm(same[i] - s.hull[i]) < 1e-15);
  CHECK(polygonArea(dilate(s, 2.0)) == Catch::Approx(4 * polygonArea(s.hull)).epsilon(1e-12));
  CHECK(polygonArea(dilate(s, 0.5)) == Catch::Approx(0.25 * polygonArea(s.hull)).epsilon(1e-12));

  // monotonicity: node sets nested along 20 heights, 100 centers
  auto centers = sampleCenters(e.u, e.u.domain.dilated(vec2(0, 0), 0.5), 100);
  REQUIRE(centers.size() == 100);
  for (int c : centers) {
    std::vector<char> prev(e.u.nodes.size(), 1);
    double t = 0.05;
    for (int k = 0; k < 20; ++k, t *= 0.8) {
      auto sk = section(e.u, c, t, false);
      std::vector<char> cur(e.u.nodes.size(), 0);
      for (int z : sk.nodes) cur[z] = 1;
      if (k > 0)
        for (size_t z = 0; z < cur.size(); ++z)
          if (cur[z]) CHECK(prev[z]);  // smaller height stays inside
      prev = cur;
    }
  }
}

TEST_CASE("safe height matches the closed form on quadratics") {
  const double h = 2.0 / 64;
  auto e = analyticCatalog("quadratic_disc", h);
  const Body2 inner = e.u.domain.dilated(vec2(0, 0), 0.5);
  const Body2 outer = e.u.domain.dilated(vec2(0, 0), 0.75);
  // S(x,s) = B(x, sqrt(2s)); S(x,2 rho) inside B(0,3/4) for |x| <= 1/2 forces
  // sqrt(4 rho) <= 1/4, so the largest dyadic rho is exactly 1/64
  CHECK(safeHeight(e.u, inner, outer) == 1.0 / 64);

  auto e2 = analyticCatalog("scaled_quadratic", h, 2.0);  // heights scale with c
  CHECK(safeHeight(e2.u, e2.u.domain.dilated(vec2(0, 0), 0.5),
                   e2.u.domain.dilated(vec2(0, 0), 0.75)) == 1.0 / 32);

  CHECK_THROWS_AS(safeHeight(e.u, outer, outer), NoPositiveHeight);
}

TEST_CASE("engulfing constants on the quadratic match the ball calculus") {
  const double h = 2.0 / 128;
  auto e = analyticCatalog("quadratic_disc", h);
  const double rho = 1.0 / 64;
  auto centers = sampleCenters(e.u, e.u.domain.dilated(vec2(0, 0), 0.5), 60);
  auto rep = verifyEngulfing(e.u, rho, centers);
  REQUIRE(rep.triples > 300);
  REQUIRE(rep.pairs > 50);
  for (const auto& [tau, beta] : rep.beta) {
    CHECK(beta >= std::sqrt(tau) - 0.05);  // closed form is sqrt(tau)
    CHECK(beta <= std::sqrt(tau) * 1.3);
  }
  CHECK(rep.betaAt(0.5) <= 0.95);  // bounded away from 1
  // triangle inequality on balls gives theta <= 9, and near-touching pairs
  // realize most of it
  CHECK(rep.theta <= 9.0 + 1e-9);
  CHECK(rep.theta >= 5.0);
  CHECK(rep.theta > 1.0);
}

TEST_CASE("a corrupted node makes the dilation inclusion fail loudly") {
  const double h = 2.0 / 128;
  auto e = analyticCatalog("quadratic_disc", h);
  const double rho = 1.0 / 64;
  const int x = nodeNear(e.u, vec2(-0.4, 0.0));
  const int bad = nodeNear(e.u, e.u.nodes[x] + vec2(0.5, 0.0));
  e.u.values[bad] -= 3.2 * 2 * rho;  // joins S(x,2rho) without joining S(x,tau 2rho)
  CHECK_THROWS_AS(verifyEngulfing(e.u, rho, {x}), InclusionViolation);
}

TEST_CASE("greedy cover: single candidate, duplicates, and overlap scaling") {
  const double h = 2.0 / 64;
  auto e = analyticCatalog("quadratic_disc", h);
  const double rho = 1.0 / 64;
  const int id = nodeNear(e.u, vec2(0.1, -0.2));

  auto solo = cover(e.u, {{id, rho}}, 0.1);
  CHECK(solo.picked.size() == 1);
  CHECK(solo.maxOverlap == 1);

  auto dup = cover(e.u, {{id, rho}, {id, rho}}, 0.1);
  CHECK(dup.picked.size() == 1);

  // uniform family over B(0,1/2) at constant height: one K fits every eps,
  // and K must not drift by more than 2x between eps = 0.1 and eps = 0.01
  std::vector<CoverCandidate> fam;
  const Body2 inner = e.u.domain.dilated(vec2(0, 0), 0.5);
  for (int i = 0; i < e.u.nInterior; ++i)
    if (inner.contains(e.u.nodes[i])) fam.push_back({i, rho});
  double kAll = 0, k10 = 0, k01 = 0;
  for (double eps : {0.5, 0.1, 0.01}) {
    auto res = cover(e.u, fam, eps);
    CHECK(res.maxOverlap >= 1);
    CHECK(res.maxOverlap <= 12);  // Vitali overlap of ball families stays bounded
    kAll = std::max(kAll, res.overlapConstant());
    if (eps == 0.1) k10 = res.overlapConstant();
    if (eps == 0.01) k01 = res.overlapConstant();
  }
  for (double eps : {0.5, 0.1, 0.01})
    CHECK(cover(e.u, fam, eps).maxOverlap <= kAll * std::abs(std::log(eps)) + 1e-9);
  const double drift = std::max(k10, k01) / std::min(k10, k01);
  CHECK(drift <= 2.0 + 1e-9);
}

TEST_CASE("maximal field is the constant Hessian norm on quadratics") {
  const double h = 2.0 / 48;
  for (auto [name, param, want] :
       {std::tuple{"quadratic_disc", 2.0, 1.0}, std::tuple{"anisotropic_quadratic", 4.0, 4.0}}) {
    auto e = analyticCatalog(name, h, param);
    const Body2 inner = e.u.domain.dilated(vec2(0, 0), 0.5);
    auto mf = maximalField(e.u, inner, 1.0 / 64);
    REQUIRE(mf.nodeIds.size() > 50);
    for (size_t i = 0; i < mf.M.size(); ++i) {
      CHECK(mf.M[i] == Catch::Approx(want).epsilon(1e-12));
      CHECK(mf.bestT[i] == 1.0 / 64);  // constant averages keep the first rung
    }
  }
}
