#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nestor/ledger.hpp"
#include "nestor/rng.hpp"

namespace nestor {

// Trajectory prefix (y_0, ..., y_{d-1}); the stage index d is the length.
struct History {
  std::vector<double> values;

  History() = default;
  explicit History(std::vector<double> v) : values(std::move(v)) {}

  int stage() const { return static_cast<int>(values.size()); }
};

// A repeatedly nested expectation problem over horizon D:
//
//   gamma_d(y_{<d}) = E[ g_d(y_{<=d}, gamma_{d+1}(y_{<=d})) | y_{<d} ],  d < D
//   gamma_D(y_{<D}) = E[ g_D(y_{<=D}) | y_{<D} ]
//
// with each g_d (d < D) Lipschitz in its scalar last argument with
// constant lipschitz[d] >= 1, and a conditional sampler for y_d | y_{<d}.
struct NestedProblem {
  int horizon = 0;                 // D
  std::vector<double> lipschitz;   // L_0 .. L_D, each >= 1

  // g_d(y_{<=d}, z) for d < D; y_le_d has length d+1.
  std::function<double(int d, std::span<const double> y_le_d, double z)>
      stage_fn;
  // g_D(y_{<=D}); argument has length D+1.
  std::function<double(std::span<const double> y)> terminal_fn;
  // Draw y_d given the prefix y_{<d} (length d).
  std::function<double(std::span<const double> y_lt_d, RngStream&)> sampler;

  // Uniform bound on sqrt(E[g_D(y)^2 | y_{<D}]); used by the quantum
  // cost model as the terminal clipping radius.
  double terminal_l2_bound = 1.0;
  // Uniform bound on sqrt(E[g_d(y_{<=d}, 0)^2 | y_{<d}]) over d < D.
  double stage_zero_l2_bound = 1.0;
};

// One conditional process step; costs exactly 1 classical step.
// Throws ParameterError if history.stage() > problem.horizon.
double sample_next(const NestedProblem& problem, const History& history,
                   RngStream& rng, CostLedger& ledger);

// Brute-force plug-in nested Monte Carlo estimate of gamma_d(y_{<d}) with
// `fanout` samples per level.  Biased for finite fanout, consistent as
// fanout grows; used only as a test oracle, so it keeps no ledger.
double gamma_oracle(const NestedProblem& problem, const History& history,
                    long fanout, RngStream& rng);

}  // namespace nestor
