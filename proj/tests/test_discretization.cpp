#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "klab/fiber.hpp"
#include "klab/grid.hpp"
#include "klab/model.hpp"

using namespace klab;

namespace {

const ProblemExponents kExps = ProblemExponents::make(4, 2.0, 3.0);
const KirchhoffModel kModel = KirchhoffModel::make(1, 1, 3);

RadialFunction smooth_profile(const GridPtr& g) {
  RadialFunction u(g);
  for (int i = 0; i < g->n; ++i) {
    const double r = g->r[i];
    u.v[i] = (1.0 - r * r) * std::cos(2.0 * r);
  }
  u.enforce_boundary();
  return u;
}

}  // namespace

TEST_CASE("grid construction and validation") {
  auto g = RadialGrid::make(4, 1.0, 201);
  CHECK(g->h * (g->n - 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g->surface == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));  // |S^3|
  CHECK(RadialGrid::make(2, 1.0, 64)->surface == doctest::Approx(2.0 * M_PI));
  CHECK_THROWS_AS(RadialGrid::make(4, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid::make(4, -1.0, 100), std::invalid_argument);
}

TEST_CASE("norms against hand integrals") {
  const ProblemExponents e2 = ProblemExponents::make(2, 1.5, 2.0);
  auto g = RadialGrid::make(2, 1.0, 201);
  RadialFunction u(g);
  for (int i = 0; i < g->n; ++i) u.v[i] = 1.0 - g->r[i];

  // |grad u| = 1: integral over the disc is pi; exact for the midpoint rule.
  ProblemExponents ep2 = e2;
  ep2.p = 2.0;  // evaluate the p = 2 norm on the same grid
  CHECK(grad_norm_p(u, ep2) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(lebesgue_norm(u, 1.0) == doctest::Approx(M_PI / 3.0).epsilon(1e-4));

  RadialFunction zero(g);
  CHECK(grad_norm_p(zero, ep2) == 0.0);
  CHECK(lebesgue_norm(zero, 2.0) == 0.0);
}

TEST_CASE("norm homogeneity is exact in the scaling power") {
  auto g = RadialGrid::make(4, 1.0, 101);
  SplitMix64 rng(5);
  RadialFunction u = random_bump(g, rng);
  const double k = 2.37;
  RadialFunction ku = u;
  for (double& x : ku.v) x *= k;
  CHECK(grad_norm_p(ku, kExps) ==
        doctest::Approx(std::pow(k, kExps.p) * grad_norm_p(u, kExps)).epsilon(1e-13));
  CHECK(lebesgue_norm(ku, 3.0) ==
        doctest::Approx(std::pow(k, 3.0) * lebesgue_norm(u, 3.0)).epsilon(1e-13));
}

TEST_CASE("quadrature is second order: Richardson ratio near 4") {
  // On the disc the h^2 boundary term of both rules is nonzero for this
  // profile.  (For Dirichlet profiles in higher dimension the trapezoid
  // boundary terms cancel and the s-norms superconverge past h^2.)
  const ProblemExponents e2d = ProblemExponents::make(2, 1.5, 2.0);
  auto profile = [](const GridPtr& g) {
    RadialFunction u(g);
    for (int i = 0; i < g->n; ++i) u.v[i] = std::cos(0.5 * M_PI * g->r[i]);
    u.enforce_boundary();
    return u;
  };
  const RadialFunction uc = profile(RadialGrid::make(2, 1.0, 101));
  const RadialFunction um = profile(RadialGrid::make(2, 1.0, 201));
  const RadialFunction uf = profile(RadialGrid::make(2, 1.0, 401));
  for (auto eval : {+[](const RadialFunction& u, const ProblemExponents& e) {
                      return grad_norm_p(u, e);
                    },
                    +[](const RadialFunction& u, const ProblemExponents& e) {
                      return lebesgue_norm(u, e.pstar);
                    }}) {
    const double e1 = eval(uc, e2d), e2 = eval(um, e2d), e3 = eval(uf, e2d);
    const double ratio = (e2 - e1) / (e3 - e2);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
  }

  // In the default dimension refinement still converges (at least as fast).
  auto g1 = RadialGrid::make(4, 1.0, 101);
  auto g2 = RadialGrid::make(4, 1.0, 201);
  auto g3 = RadialGrid::make(4, 1.0, 401);
  const double v1 = lebesgue_norm(smooth_profile(g1), kExps.pstar);
  const double v2 = lebesgue_norm(smooth_profile(g2), kExps.pstar);
  const double v3 = lebesgue_norm(smooth_profile(g3), kExps.pstar);
  CHECK((v2 - v1) / (v3 - v2) >= 3.2);
}

TEST_CASE("energy assembles from its parts and is affine in lambda") {
  auto g = RadialGrid::make(4, 1.0, 101);
  SplitMix64 rng(9);
  RadialFunction u = random_bump(g, rng);

  RadialFunction zero(g);
  CHECK(energy(zero, 3.0, kModel, kExps).phi == 0.0);

  const EnergyBreakdown e0 = energy(u, 0.0, kModel, kExps);
  const EnergyBreakdown e1 = energy(u, 1.0, kModel, kExps);
  const EnergyBreakdown e2 = energy(u, 2.0, kModel, kExps);
  CHECK(e1.phi == doctest::Approx(e0.phi - e1.pert).epsilon(1e-12));
  CHECK(e2.phi - e1.phi == doctest::Approx(e1.phi - e0.phi).epsilon(1e-10));
  CHECK(e1.pert > 0.0);
  CHECK(e0.phi ==
        doctest::Approx(kModel.mhat(e0.gradp) / 2.0 - e0.crit / 4.0).epsilon(1e-14));

  // Under the weak coefficient bound the lambda = 0 energy is nonnegative.
  for (int k = 0; k < 10; ++k) {
    RadialFunction w = random_bump(g, rng);
    CHECK(energy(w, 0.0, kModel, kExps).phi >= 0.0);
  }
}

TEST_CASE("energy gradient matches central finite differences") {
  auto g = RadialGrid::make(4, 1.0, 101);
  SplitMix64 rng(13);
  for (double lambda : {0.0, 50.0}) {
    RadialFunction u = random_bump(g, rng);
    const RadialFunction grad = energy_gradient(u, lambda, kModel, kExps);
    CHECK(grad.v.back() == 0.0);
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j + 1 < g->n; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(u.v[j]));
      RadialFunction up = u, um = u;
      up.v[j] += step;
      um.v[j] -= step;
      const double fd =
          (energy(up, lambda, kModel, kExps).phi - energy(um, lambda, kModel, kExps).phi) /
          (2.0 * step);
      worst = std::max(worst, std::abs(fd - grad.v[j]));
      scale = std::max(scale, std::abs(fd));
    }
    CHECK(worst <= 1e-6 * scale);
  }

  RadialFunction zero(g);
  const RadialFunction gz = energy_gradient(zero, 7.0, kModel, kExps);
  for (double x : gz.v) CHECK(x == 0.0);
}

TEST_CASE("bubble normalization, cutoff support and overflow guard") {
  auto g = RadialGrid::make(4, 1.0, 2001);
  RadialFunction u = bubble(1e-3, g, kExps, /*normalized=*/true);
  CHECK(grad_norm_p(u, kExps) == doctest::Approx(1.0).epsilon(1e-10));
  // Support ends at 2 rc = R/2.
  for (int i = 0; i < g->n; ++i)
    if (g->r[i] >= 0.5) CHECK(u.v[i] == 0.0);
  CHECK_THROWS_AS(bubble(1e-320, g, kExps, false), std::invalid_argument);
  CHECK_THROWS_AS(bubble(1e-3, g, kExps, false, 0.6), std::invalid_argument);
}

TEST_CASE("bubble norm growth follows the concentration slope") {
  auto g = RadialGrid::make(4, 1.0, 20001);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const RadialFunction v = bubble(eps, g, kExps, false);
    const double x = std::log(eps), y = std::log(grad_norm_p(v, kExps));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - (-1.0)) < 0.05);  // -(N-p)/p = -1 at the defaults
}

TEST_CASE("serialization round trip") {
  auto g = RadialGrid::make(4, 1.0, 64);
  SplitMix64 rng(21);
  RadialFunction u = random_bump(g, rng);
  const RadialFunction back = RadialFunction::from_json(u.to_json());
  REQUIRE(back.size() == u.size());
  for (int i = 0; i < u.size(); ++i) CHECK(back.v[i] == u.v[i]);
  CHECK(back.grid->dim == g->dim);
  CHECK(back.grid->h == g->h);

  const std::string csv = u.to_csv();
  CHECK(csv.substr(0, 4) == "r,u\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == u.size() + 1);
}
