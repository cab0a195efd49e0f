#include <doctest.h>

#include <cmath>

#include "klab/fiber.hpp"
#include "klab/grid.hpp"
#include "klab/model.hpp"

using namespace klab;

namespace {

const ProblemExponents kExps = ProblemExponents::make(4, 2.0, 3.0);
const KirchhoffModel kModel = KirchhoffModel::make(1, 1, 3);

FiberConstants random_constants(SplitMix64& rng) {
  // Random but embedding-consistent: B stays below S A^{pstar/p}.
  FiberConstants fc;
  fc.A = std::exp(rng.uniform(-1.5, 1.5));
  fc.B = kExps.S * std::pow(fc.A, kExps.pstar / kExps.p) * rng.uniform(0.05, 0.95);
  fc.C = std::exp(rng.uniform(-6.0, -2.0));
  return fc;
}

}  // namespace

TEST_CASE("fiber map vanishes at zero and grows supercritically") {
  SplitMix64 rng(1);
  const FiberConstants fc = random_constants(rng);
  for (double lambda : {0.0, 10.0, 500.0}) {
    CHECK(psi(fc, lambda, 0.0, kModel, kExps) == 0.0);
    CHECK(d_psi(fc, lambda, 0.0, kModel, kExps) == 0.0);
    // p alpha > pstar drives both to +infinity along the ray.
    CHECK(psi(fc, lambda, 1e5, kModel, kExps) > 1e10);
    CHECK(d_psi(fc, lambda, 1e5, kModel, kExps) > 1e10);
  }
}

TEST_CASE("analytic fiber derivatives match finite differences") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const FiberConstants fc = random_constants(rng);
    const double lambda = rng.uniform(0.0, 300.0);
    const double t = std::exp(rng.uniform(-2.0, 2.0));
    const double h = 1e-6 * t;
    const double fd1 = (psi(fc, lambda, t + h, kModel, kExps) -
                        psi(fc, lambda, t - h, kModel, kExps)) / (2.0 * h);
    const double an1 = d_psi(fc, lambda, t, kModel, kExps);
    CHECK(std::abs(fd1 - an1) <=
          1e-8 * std::max({std::abs(fd1), std::abs(an1), 1e-12}) + 1e-12);
    const double fd2 = (d_psi(fc, lambda, t + h, kModel, kExps) -
                        d_psi(fc, lambda, t - h, kModel, kExps)) / (2.0 * h);
    const double an2 = dd_psi(fc, lambda, t, kModel, kExps);
    CHECK(std::abs(fd2 - an2) <= 1e-6 * std::max({std::abs(fd2), std::abs(an2), 1e-12}));
  }
}

TEST_CASE("fiber map is strictly decreasing in lambda at fixed dilation") {
  SplitMix64 rng(3);
  const FiberConstants fc = random_constants(rng);
  for (int k = 0; k < 10; ++k) {
    const double t = std::exp(rng.uniform(-2.0, 2.0));
    const double l1 = rng.uniform(0.0, 100.0);
    const double l2 = l1 + rng.uniform(0.1, 50.0);
    CHECK(psi(fc, l2, t, kModel, kExps) < psi(fc, l1, t, kModel, kExps));
  }
}

TEST_CASE("zero-touch level: defining system holds at the solution") {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const FiberConstants fc = random_constants(rng);
    const FiberSolution s = lambda0_of_u(fc, kModel, kExps);
    CHECK(s.lambda0 > 0.0);
    CHECK(s.t0 > 0.0);
    // |psi| at the touch point is tiny relative to the fiber scale.
    CHECK(std::abs(psi(fc, s.lambda0, s.t0, kModel, kExps)) <= 1e-10 * s.scale);
    CHECK(std::abs(d_psi(fc, s.lambda0, s.t0, kModel, kExps)) * s.t0 <= 1e-7 * s.scale);
    // Infimum property on a dense grid plus small-t positivity.
    double min_psi = 0.0;
    double first_positive = -1.0;
    for (int i = 0; i < 2000; ++i) {
      const double t = std::exp(std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 1999.0);
      const double v = psi(fc, s.lambda0, t, kModel, kExps);
      if (std::isfinite(v)) min_psi = std::min(min_psi, v);
      if (first_positive < 0.0) first_positive = v;
    }
    CHECK(min_psi >= -1e-10 * s.scale);
    CHECK(first_positive > 0.0);  // fiber is positive near zero
  }
}

TEST_CASE("level sign flips across the zero-touch value") {
  SplitMix64 rng(5);
  const FiberConstants fc = random_constants(rng);
  const FiberSolution s = lambda0_of_u(fc, kModel, kExps);
  auto min_psi_at = [&](double lambda) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4000; ++i) {
      const double t = std::exp(std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 3999.0);
      const double v = psi(fc, lambda, t, kModel, kExps);
      if (std::isfinite(v)) m = std::min(m, v);
    }
    return m;
  };
  CHECK(min_psi_at(s.lambda0 * 0.999) > 0.0);
  CHECK(min_psi_at(s.lambda0 * 1.001) < 0.0);
}

TEST_CASE("derivative-touch level sits strictly below the zero-touch level") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const FiberConstants fc = random_constants(rng);
    const FiberSolution s0 = lambda0_of_u(fc, kModel, kExps);
    const FiberSolution s1 = lambda1_of_u(fc, kModel, kExps);
    CHECK(s1.lambda1 < s0.lambda0);
    // psi' >= 0 everywhere at the derivative-touch level, = 0 at t1.
    CHECK(std::abs(d_psi(fc, s1.lambda1, s1.t1, kModel, kExps)) <= 1e-9 * s1.scale);
    double min_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2000; ++i) {
      const double t = std::exp(std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 1999.0);
      const double v = d_psi(fc, s1.lambda1, t, kModel, kExps);
      if (std::isfinite(v)) min_d = std::min(min_d, v);
    }
    CHECK(min_d >= -1e-9 * s1.scale);
    // Below the level the fiber derivative is strictly positive.
    double min_below = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2000; ++i) {
      const double t = std::exp(std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 1999.0);
      min_below = std::min(min_below, d_psi(fc, 0.9 * s1.lambda1, t, kModel, kExps));
    }
    CHECK(min_below > 0.0);
  }
}

TEST_CASE("zero-homogeneity of the per-function level on the discrete ball") {
  auto grid = RadialGrid::make(4, 1.0, 201);
  SplitMix64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    RadialFunction u = random_bump(grid, rng);
    const FiberSolution base = lambda0_of_u(FiberConstants::of(u, kExps), kModel, kExps);
    for (double k : {0.1, 3.0, 10.0}) {
      RadialFunction ku = u;
      for (double& x : ku.v) x *= k;
      const FiberSolution s = lambda0_of_u(FiberConstants::of(ku, kExps), kModel, kExps);
      CHECK(std::abs(s.lambda0 - base.lambda0) <= 1e-8 * base.lambda0);
      // The touching dilation rescales inversely.
      CHECK(s.t0 * k == doctest::Approx(base.t0).epsilon(1e-6));
    }
  }
}

TEST_CASE("two independent scan grids agree on the level") {
  SplitMix64 rng(8);
  const FiberConstants fc = random_constants(rng);
  FiberScanOptions a, b;
  a.points = 3001;
  b.points = 5000;
  b.t_lo = 3e-6;
  b.t_hi = 3e5;
  const double va = lambda0_of_u(fc, kModel, kExps, a).lambda0;
  const double vb = lambda0_of_u(fc, kModel, kExps, b).lambda0;
  CHECK(std::abs(va - vb) <= 1e-8 * std::abs(va));
}

TEST_CASE("fiber profile CSV starts at t = 0 with a zero fiber value") {
  auto grid = RadialGrid::make(4, 1.0, 201);
  RadialFunction u = bubble(1e-2, grid, kExps, true);
  const FiberConstants fc = FiberConstants::of(u, kExps);
  const std::string csv = fiber_profile_csv(fc, 10.0, kModel, kExps);
  CHECK(csv.rfind("t,psi,dpsi,Lambda,Theta\n", 0) == 0);
  // First data row is t = 0 with psi = 0.
  const auto line1 = csv.substr(csv.find('\n') + 1);
  CHECK(line1.substr(0, line1.find('\n')).find("0.0000000000000000e+00,0.0000000000000000e+00") == 0);
}

TEST_CASE("degenerate constants are rejected") {
  auto grid = RadialGrid::make(4, 1.0, 64);
  RadialFunction zero(grid);
  CHECK_THROWS_AS(FiberConstants::of(zero, kExps), std::invalid_argument);
}
