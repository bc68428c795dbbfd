#pragma once

#include <cstdint>
#include <map>

namespace nestor {

// Dual cost accounting.
//
// classical_steps counts trajectory-simulation steps actually executed
// (unit cost 1 per step; function evaluations are free).  quantum_charged
// counts the oracle queries a quantum mean-estimation device would be
// charged for the same computation; it is written by the quantum-cost
// model, not by the classical emulation loop.  per_level breaks the
// charged count down by MLMC level at the outermost stage.
struct CostLedger {
  std::uint64_t classical_steps = 0;
  std::uint64_t quantum_charged = 0;
  std::map<int, std::uint64_t> per_level;

  void add_step(std::uint64_t n = 1) { classical_steps += n; }
  void charge(std::uint64_t q) { quantum_charged += q; }
  void charge_level(int level, std::uint64_t q) {
    quantum_charged += q;
    per_level[level] += q;
  }

  // Componentwise sum; commutative and associative, so worker-local
  // ledgers can be merged in any order.
  void merge(const CostLedger& other);

  bool operator==(const CostLedger& other) const = default;
};

}  // namespace nestor
