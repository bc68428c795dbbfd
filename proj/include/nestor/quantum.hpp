#pragma once

#include <cstdint>
#include <map>

#include "nestor/problem.hpp"
#include "nestor/qamc.hpp"
#include "nestor/report.hpp"

namespace nestor {

// Parameters of the direct quantization (worst-case-branch recursion).
struct DirectQuantParams {
  double r = 0.5;        // level-distribution rate
  double alpha = 2.0 / 3.0;  // per-level accuracy ratio
};

// Direct quantization of the randomized recursion: at the terminal stage
// a single mean estimation of g_D at RMSE eps; otherwise one mean
// estimation of A(y_{<=d}, N)/pmf(N) with N ~ truncated geometric(r, B_d),
// B_d = ceil(log_alpha(eps / (sqrt(D) L_0...L_d))), and A built from
// recursive calls at accuracies alpha^n, alpha^{n-1} (coarse term dropped
// at n = 0).
//
// Charging uses worst-case-branch semantics: a quantum device cannot pay
// an expected cost over the random level inside a query, so every outer
// query is charged the most expensive branch n <= B_d.  The charge is
// computed by a deterministic pre-pass; the classical emulation
// accumulates real trajectory steps only.
EstimateReport direct_quantized_estimate(const NestedProblem& problem, int d,
                                         const History& history, double eps,
                                         const DirectQuantParams& params,
                                         const QamcConfig& config,
                                         RngStream& rng, CostLedger& ledger);

// Quantum MLMC with the deterministic level schedule: B_d =
// ceil(2 log2(L_d/eps)) (no 2L factor, unlike the classical truncation);
// per level n one mean estimation of the successive difference
// Delta(., n) at RMSE eps/(3(B_d+1)) with second-moment bound
// s = 3 L_d 2^{-n/2}; the result is the sum over levels.  The charged
// cost is a deterministic function of (eps, L, D, d, kappa).
EstimateReport qmlmc_estimate(const NestedProblem& problem, int d,
                              const History& history, double eps,
                              const QamcConfig& config, RngStream& rng,
                              CostLedger& ledger);

// Deterministic charged-cost pre-passes (also used for reports above).
std::uint64_t qmlmc_charge(const NestedProblem& problem, int d, double eps,
                           const QamcConfig& config,
                           std::map<int, std::uint64_t>* per_level = nullptr);
std::uint64_t direct_quantized_charge(const NestedProblem& problem, int d,
                                      double eps,
                                      const DirectQuantParams& params,
                                      const QamcConfig& config,
                                      int* worst_level = nullptr);

// Classical step counts of the emulations, used by the desk-scale
// guardrail and for feasibility reporting.  Exact for quantum MLMC (its
// sample counts are deterministic); an expectation over the random level
// draws for the direct quantization.
double qmlmc_classical_cost(const NestedProblem& problem, int d, double eps);
double direct_quantized_classical_cost(const NestedProblem& problem, int d,
                                       double eps,
                                       const DirectQuantParams& params);

// Second-moment bound passed to the outer mean estimation of the direct
// quantization (exposed for the moment-certificate tests).
double direct_moment_bound(const NestedProblem& problem, int d, double eps,
                           const DirectQuantParams& params);

// Truncation level of the direct quantization at stage d and accuracy eps.
int direct_truncation_level(const NestedProblem& problem, int d, double eps,
                            const DirectQuantParams& params);

// Truncation level of quantum MLMC: ceil(2 log2(L_d/eps)), floored at 0.
int qmlmc_truncation_level(double lipschitz, double eps);

}  // namespace nestor
