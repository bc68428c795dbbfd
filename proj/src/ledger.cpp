#include "nestor/ledger.hpp"

namespace nestor {

void CostLedger::merge(const CostLedger& other) {
  classical_steps += other.classical_steps;
  quantum_charged += other.quantum_charged;
  for (const auto& [level, count] : other.per_level) {
    per_level[level] += count;
  }
}

}  // namespace nestor
