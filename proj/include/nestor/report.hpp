#pragma once

#include <cstdint>
#include <string>

#include "nestor/ledger.hpp"

namespace nestor {

// Estimator variants exposed to the benchmark harness.
enum class Mode {
  Alg1,       // single-sample randomized MLMC, antithetic differences
  Alg2Geo,    // batched randomized MLMC, geometric levels
  Alg2Trunc,  // batched randomized MLMC, truncated levels
  Alg3,       // derandomized deterministic-schedule MLMC
  Alg4,       // direct quantization, worst-case-branch charging
  Alg6,       // quantum MLMC with deterministic level schedule
};

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct EstimateReport {
  double estimate = 0.0;
  double target_error = 0.0;  // eps the estimator was asked for
  int stage = 0;
  CostLedger ledger;          // costs of this run only
  std::uint64_t seed = 0;     // filled by the harness that owns the seed
  Mode mode = Mode::Alg1;

  bool operator==(const EstimateReport& other) const = default;
};

}  // namespace nestor
