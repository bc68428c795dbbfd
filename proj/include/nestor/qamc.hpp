#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "nestor/ledger.hpp"
#include "nestor/rng.hpp"

namespace nestor {

// Quantum-accelerated mean-estimation oracle, emulated classically.
//
// The returned values honestly satisfy the stated error contracts using
// classical sampling (the samples are really drawn and their trajectory
// steps are counted by the sampler's own instrumentation).  The ledger's
// quantum_charged field is incremented by the query count a quantum
// device would be charged: (sigma/eps) * log factors instead of the
// classical (sigma/eps)^2.

struct QamcConfig {
  double kappa = 1.0;        // leading constant of the charged cost
  std::uint64_t min_charge = 1;  // floor on charged queries
};

// A randomized scalar procedure; instruments its own classical steps.
using QSampler = std::function<double(RngStream&, CostLedger&)>;

// Charged query counts; deterministic functions of their arguments.
std::uint64_t qamc_eps_delta_charge(double sigma, double eps,
                                    double delta_fail,
                                    const QamcConfig& config);
std::uint64_t qamc_rmse_charge(double s_bound, double eps,
                               const QamcConfig& config);

// Median-of-means parameterization used by qamc_eps_delta:
// (k groups, m samples per group).
std::pair<std::uint64_t, std::uint64_t> qamc_mom_params(double sigma,
                                                        double eps,
                                                        double delta_fail);

// Estimate EX with P(|est - EX| > eps) <= delta_fail, given
// sigma >= sd(X).  Realized by median-of-means with k = ceil(8 ln(1/delta))
// groups of m = ceil(4 sigma^2/eps^2) samples; charges
// max(min_charge, ceil(kappa (sigma/eps) ln(1/delta))).
double qamc_eps_delta(const QSampler& sampler, double sigma, double eps,
                      double delta_fail, const QamcConfig& config,
                      RngStream& rng, CostLedger& ledger);

// Estimate EX with RMSE <= eps, given s_bound >= sqrt(E[X^2]).  Realized
// as the clipped sample mean phi_s(mean of n = ceil(s^2/eps^2) samples),
// phi_s(x) = min(s, max(-s, x)); clipping is a projection onto
// [-s, s] which contains EX, so it never increases the MSE.  Charges
// max(min_charge, ceil(kappa (s/eps) max(1, log2(s/eps)))).
double qamc_rmse(const QSampler& sampler, double s_bound, double eps,
                 const QamcConfig& config, RngStream& rng,
                 CostLedger& ledger);

// Number of classical samples qamc_rmse draws for the given contract.
std::uint64_t qamc_rmse_samples(double s_bound, double eps);

}  // namespace nestor
