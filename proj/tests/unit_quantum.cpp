#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "nestor/errors.hpp"
#include "nestor/quantum.hpp"
#include "nestor/schedule.hpp"
#include "nestor/registry.hpp"

using namespace nestor;

TEST_CASE("qmlmc is exact on the identity chain") {
  // Every successive difference is a constant, so each per-level mean
  // estimation returns it exactly and the level sum reproduces 0.7.
  const NestedProblem& chain = find_problem("identity-chain");
  QamcConfig cfg;
  RngStream rng(1);
  CostLedger led;
  EstimateReport rep = qmlmc_estimate(chain, 0, History{}, 0.5, cfg, rng,
                                      led);
  // Exact up to FP accumulation across the per-level mean estimations.
  CHECK(std::abs(rep.estimate - 0.7) < 1e-9);
  CHECK(rep.mode == Mode::Alg6);
  CHECK(rep.stage == 0);
  CHECK(rep.ledger.quantum_charged == qmlmc_charge(chain, 0, 0.5, cfg));
  CHECK(rep.ledger.quantum_charged > 0);
}

TEST_CASE("direct quantization concentrates near 0.7 on the chain") {
  // The outer mean estimation carries the 1/pmf(N) reweighting, so single
  // runs are only eps-accurate in RMSE, not exact.
  const NestedProblem& chain = find_problem("identity-chain");
  QamcConfig cfg;
  DirectQuantParams params;
  const double eps = 0.45;
  RngStream rng(2);
  const int reps = 40;
  double sq = 0.0;
  for (int i = 0; i < reps; ++i) {
    CostLedger led;
    EstimateReport rep = direct_quantized_estimate(chain, 0, History{}, eps,
                                                   params, cfg, rng, led);
    if (i == 0) CHECK(rep.mode == Mode::Alg4);
    double err = rep.estimate - 0.7;
    sq += err * err;
  }
  CHECK(std::sqrt(sq / reps) <= 1.2 * eps);
}

TEST_CASE("charges are bit-deterministic and match the pre-passes") {
  const NestedProblem& p = find_problem("gauss-rne-D1");
  QamcConfig cfg;
  DirectQuantParams params;
  const double eps = 0.3;
  std::uint64_t q6 = 0, q4 = 0;
  for (std::uint64_t seed : {7ULL, 1234ULL}) {
    RngStream r1(seed), r2(seed + 1);
    CostLedger l1, l2;
    EstimateReport a = qmlmc_estimate(p, 0, History{}, eps, cfg, r1, l1);
    EstimateReport b =
        direct_quantized_estimate(p, 0, History{}, eps, params, cfg, r2, l2);
    if (q6 == 0) {
      q6 = a.ledger.quantum_charged;
      q4 = b.ledger.quantum_charged;
    } else {
      CHECK(a.ledger.quantum_charged == q6);
      CHECK(b.ledger.quantum_charged == q4);
    }
  }
  CHECK(q6 == qmlmc_charge(p, 0, eps, cfg));
  CHECK(q4 == direct_quantized_charge(p, 0, eps, params, cfg));
}

TEST_CASE("classical emulation steps match the deterministic cost") {
  QamcConfig cfg;
  DirectQuantParams params;
  for (const char* id : {"identity-chain", "gauss-rne-D1"}) {
    const NestedProblem& p = find_problem(id);
    // The chain's emulation cost climbs steeply below eps ~ 0.5; keep the
    // cross-check at desk scale.
    const double eps = (p.horizon == 2) ? 0.5 : 0.35;
    RngStream r1(3), r2(4);
    CostLedger l1, l2;
    qmlmc_estimate(p, 0, History{}, eps, cfg, r1, l1);
    CHECK(static_cast<double>(l1.classical_steps) ==
          doctest::Approx(qmlmc_classical_cost(p, 0, eps)));
    // The direct quantization's step count is random (level draws inside
    // the outer mean estimation); the pre-pass is its expectation.
    direct_quantized_estimate(p, 0, History{}, eps, params, cfg, r2, l2);
    double expected = direct_quantized_classical_cost(p, 0, eps, params);
    double realized = static_cast<double>(l2.classical_steps);
    CHECK(realized > 0.8 * expected);
    CHECK(realized < 1.25 * expected);
  }
}

TEST_CASE("truncation levels: quantum schedule is shallower") {
  CHECK(qmlmc_truncation_level(1.0, 0.1) == 7);   // ceil(2 log2 10)
  CHECK(truncation_level(1.0, 0.1) == 9);         // ceil(2 log2 20)
  CHECK(qmlmc_truncation_level(1.0, 1.0) == 0);
  CHECK(qmlmc_truncation_level(2.0, 2.0) == 0);   // floored at 0

  const NestedProblem& p = find_problem("gauss-rne-D2");
  DirectQuantParams params;
  int prev = -1;
  for (double eps : {0.5, 0.25, 0.1, 0.05}) {
    int b = direct_truncation_level(p, 0, eps, params);
    CHECK(b >= 0);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("per-level charge decomposition is consistent") {
  const NestedProblem& p = find_problem("gauss-rne-D1");
  QamcConfig cfg;
  std::map<int, std::uint64_t> per_level;
  std::uint64_t total = qmlmc_charge(p, 0, 0.15, cfg, &per_level);
  std::uint64_t sum = 0;
  for (const auto& [n, c] : per_level) {
    CHECK(n >= 0);
    CHECK(c >= 1);
    sum += c;
  }
  CHECK(sum == total);
  // Levels 0..B at the top stage all appear (plus the terminal charge).
  CHECK(per_level.size() >=
        static_cast<size_t>(qmlmc_truncation_level(1.0, 0.15)) + 1);

  DirectQuantParams params;
  int worst = -1;
  std::uint64_t dtotal = direct_quantized_charge(p, 0, 0.15, params, cfg,
                                                 &worst);
  CHECK(worst >= 0);
  CHECK(worst <= direct_truncation_level(p, 0, 0.15, params));
  CHECK(dtotal >= 1);
}

TEST_CASE("direct quantization's charge grows strictly faster") {
  // Pointwise the direct quantization can still be cheaper at moderate
  // eps; the separation is in the growth rate (~eps^-3 vs ~eps^-1 up to
  // logs at horizon 1), so compare charge ratios across a 16x refinement.
  const NestedProblem& p = find_problem("gauss-rne-D1");
  QamcConfig cfg;
  DirectQuantParams params;
  auto ratio = [](std::uint64_t a, std::uint64_t b) {
    return static_cast<double>(a) / static_cast<double>(b);
  };
  std::uint64_t q6_hi = qmlmc_charge(p, 0, 0.2, cfg);
  std::uint64_t q6_lo = qmlmc_charge(p, 0, 0.0125, cfg);
  std::uint64_t q4_hi = direct_quantized_charge(p, 0, 0.2, params, cfg);
  std::uint64_t q4_lo = direct_quantized_charge(p, 0, 0.0125, params, cfg);
  CHECK(ratio(q4_lo, q4_hi) > 1.5 * ratio(q6_lo, q6_hi));
  // By eps = 0.0125 the steeper growth has overtaken in absolute terms.
  CHECK(q4_lo > q6_lo);
}

TEST_CASE("qmlmc meets its MSE contract at a cheap accuracy") {
  const NestedProblem& p = find_problem("gauss-rne-D1");
  double truth = problem_truth("gauss-rne-D1");
  QamcConfig cfg;
  const double eps = 0.4;
  RngStream rng(9);
  const int reps = 50;
  double sq = 0.0;
  for (int i = 0; i < reps; ++i) {
    CostLedger led;
    double err =
        qmlmc_estimate(p, 0, History{}, eps, cfg, rng, led).estimate - truth;
    sq += err * err;
  }
  CHECK(sq / reps <= 1.2 * eps * eps);
}

TEST_CASE("direct quantization parameter invariant") {
  const NestedProblem& p = find_problem("gauss-rne-D1");
  QamcConfig cfg;
  DirectQuantParams bad;
  bad.r = 0.1;
  bad.alpha = 0.99;  // alpha^2/(1-r) > 1: the moment recursion diverges
  RngStream rng(10);
  CostLedger led;
  CHECK_THROWS_AS(direct_quantized_estimate(p, 0, History{}, 0.3, bad, cfg,
                                            rng, led),
                  ParameterError);
}
