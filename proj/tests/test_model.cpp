#include <doctest.h>

#include <cmath>

#include "klab/grid.hpp"
#include "klab/model.hpp"

using namespace klab;

namespace {
const ProblemExponents kDefault = ProblemExponents::make(4, 2.0, 3.0);
}

TEST_CASE("coefficient evaluation") {
  auto m1 = KirchhoffModel::make(1, 1, 3);
  CHECK(m1.m(0.0) == 1.0);
  CHECK(m1.m(2.0) == 5.0);
  CHECK(KirchhoffModel::make(2, 0.5, 2).m(4.0) == 4.0);

  CHECK(m1.mhat(0.0) == 0.0);
  CHECK(KirchhoffModel::make(1, 3, 3).mhat(1.0) == 2.0);
  CHECK(KirchhoffModel::make(1, 1, 2).mhat(2.0) == 4.0);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(KirchhoffModel::make(0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(KirchhoffModel::make(1, -1, 3), std::invalid_argument);
  CHECK_THROWS_AS(KirchhoffModel::make(1, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemExponents::make(4, 2.0, 5.0), std::invalid_argument);  // q >= pstar
  CHECK_THROWS_AS(ProblemExponents::make(4, 4.0, 3.0), std::invalid_argument);  // p >= N
}

TEST_CASE("optimal embedding constants from the closed form") {
  // N=4, p=2: S_4 = 8 pi / sqrt(6)
  CHECK(sobolev_optimal_sn(4, 2.0) ==
        doctest::Approx(8.0 * M_PI / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(kDefault.S == doctest::Approx(9.4990e-3).epsilon(1e-4));
  // N=3, p=2: S_3 = 3 (pi/2)^{4/3}
  CHECK(sobolev_optimal_sn(3, 2.0) ==
        doctest::Approx(3.0 * std::pow(M_PI / 2.0, 4.0 / 3.0)).epsilon(1e-12));
  CHECK(sobolev_constant(3, 2.0) > 0.0);
  CHECK(sobolev_constant(5, 3.0) > 0.0);
}

TEST_CASE("bubble quotient approaches the embedding constant from below") {
  // Cross-check of the closed form against the discrete extremal profile.
  for (auto [N, p] : {std::pair<int, double>{4, 2.0}, {3, 2.0}}) {
    const double q = 0.5 * (p + p * N / (N - p));
    const ProblemExponents exps = ProblemExponents::make(N, p, q);
    auto grid = RadialGrid::make(N, 1.0, 40001);
    double best = 0.0;
    for (double eps : {1e-5, 1e-6, 1e-7}) {
      RadialFunction v = bubble(eps, grid, exps, /*normalized=*/false);
      const double A = grad_norm_p(v, exps);
      const double crit = lebesgue_norm(v, exps.pstar);
      best = std::max(best, crit / std::pow(A, exps.pstar / exps.p));
    }
    CHECK(best < exps.S * 1.03);
    CHECK(best > exps.S * 0.97);
  }
}

TEST_CASE("comparison constant collapses at p = 2 and is larger otherwise") {
  CHECK(comparison_cp(kDefault).ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(comparison_cp(ProblemExponents::make(4, 3.0, 6.0)).ratio > 1.0);
  CHECK(comparison_cp(ProblemExponents::make(3, 1.5, 2.0)).ratio > 1.0);
}

TEST_CASE("default parameters satisfy every hypothesis with a wide margin") {
  const auto rep = check_hypotheses(KirchhoffModel::make(1, 1, 3), kDefault);
  CHECK(rep.rho1);
  CHECK(rep.rho2);
  CHECK(rep.beta2);
  CHECK(rep.beta1);
  CHECK(rep.gamma1);
  CHECK(rep.lhs == doctest::Approx(1.0));
  CHECK(rep.threshold_i == doctest::Approx(1.6918e-5).epsilon(1e-3));
  CHECK(rep.rho2_witness_r > kDefault.pstar);
  CHECK(rep.rho2_witness_r < 2.0 * 3.0);
}

TEST_CASE("degenerate growth routes to the limit formulas") {
  // alpha = N/(N-p): infimum is b/alpha, approached at infinity.
  const auto m = KirchhoffModel::make(1, 0.7, 2);
  const auto rep = check_hypotheses(m, kDefault);
  CHECK(rep.degenerate_alpha);
  CHECK(rep.mhat_infimum == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(rep.beta1);  // 0.35 >= (p/pstar) S ~ 4.75e-3

  const auto scan = inf_mhat_ratio(m, kDefault);
  CHECK(scan.at_infinity);
  CHECK(std::abs(scan.value - 0.35) < 1e-6);

  // alpha < N/(N-p): the ratio decays to zero and beta1 fails.
  const auto rep15 = check_hypotheses(KirchhoffModel::make(1, 1, 1.5), kDefault);
  CHECK(rep15.degenerate_alpha);
  CHECK(!rep15.beta1);
  CHECK(rep15.mhat_infimum == 0.0);
  const auto scan12 = inf_mhat_ratio(KirchhoffModel::make(1, 1, 1.2), kDefault);
  CHECK(scan12.decayed_to_zero);
  CHECK(scan12.value == 0.0);
}

TEST_CASE("scan oracle is consistent with the closed-form threshold") {
  const auto rep = check_hypotheses(KirchhoffModel::make(1, 1, 3), kDefault);
  const auto scan = inf_mhat_ratio(KirchhoffModel::make(1, 1, 3), kDefault);
  CHECK(scan.value >= (kDefault.p / kDefault.pstar) * kDefault.S);
  CHECK(!scan.decayed_to_zero);
  // At the exact threshold the infimum equals (p/pstar) S.
  const auto at = inf_mhat_ratio(KirchhoffModel::make(1, rep.threshold_i, 3), kDefault);
  CHECK(at.value ==
        doctest::Approx((kDefault.p / kDefault.pstar) * kDefault.S).epsilon(1e-9));
}

TEST_CASE("beta1 decision agrees with the oracle within 1% of the threshold") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    const int N = 3 + int(rng.uniform(0.0, 5.99));
    const double p = rng.uniform(1.2, std::min(N - 0.8, 3.5));
    const double sigma = double(N) / (N - p);
    const double alpha = sigma * rng.uniform(1.1, 2.2);
    const double a = rng.uniform(0.5, 2.0);
    const double q = 0.5 * (p + p * N / (N - p));
    const ProblemExponents exps = ProblemExponents::make(N, p, q);
    const double D = N * (alpha - 1.0) - p * alpha;
    const double E = (N - p) * (alpha - 1.0) / p;
    const double bcrit = std::pow((p / exps.pstar) * exps.S * D / (D + p), E) *
                         alpha * p / D / std::pow(a, D / p);
    for (double delta : {-0.01, 0.01}) {
      const auto model = KirchhoffModel::make(a, bcrit * (1.0 + delta), alpha);
      const auto rep = check_hypotheses(model, exps);
      const auto scan = inf_mhat_ratio(model, exps);
      const bool oracle = scan.value >= (p / exps.pstar) * exps.S;
      CHECK(rep.beta1 == oracle);
      CHECK(rep.beta1 == (delta > 0.0));
    }
  }
}

TEST_CASE("strict condition implies the weak one and matches its oracle") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const double alpha = rng.uniform(2.2, 4.0);
    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(0.5, 2.0);
    const auto model = KirchhoffModel::make(a, b, alpha);
    const auto rep = check_hypotheses(model, kDefault);
    if (rep.gamma1) {
      CHECK(rep.beta1);
      const auto scan = inf_m_ratio(model, kDefault);
      CHECK(scan.value > kDefault.S);
    }
  }
}

TEST_CASE("superadditivity and strict monotonicity of the antiderivative") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = KirchhoffModel::make(rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0),
                                            rng.uniform(1.01, 5.0));
    for (int k = 0; k < 50; ++k) {
      const double t = std::exp(rng.uniform(-6.0, 6.0));
      const double s = std::exp(rng.uniform(-6.0, 6.0));
      const double lhs = model.mhat(t + s);
      const double rhs = model.mhat(t) + model.mhat(s);
      CHECK(lhs >= rhs - 1e-12 * std::abs(lhs));
      CHECK(model.mhat(t + s) > model.mhat(t));  // strictly increasing
    }
  }
}
