#include "nestor/problem.hpp"

#include <string>

#include "nestor/errors.hpp"

namespace nestor {

double sample_next(const NestedProblem& problem, const History& history,
                   RngStream& rng, CostLedger& ledger) {
  if (history.stage() > problem.horizon) {
    throw ParameterError("sample_next: stage " +
                         std::to_string(history.stage()) +
                         " exceeds horizon " +
                         std::to_string(problem.horizon));
  }
  double y = problem.sampler(
      std::span<const double>(history.values.data(), history.values.size()),
      rng);
  ledger.add_step();
  return y;
}

namespace {

double oracle_rec(const NestedProblem& p, int d, std::vector<double>& path,
                  long fanout, RngStream& rng) {
  const int D = p.horizon;
  double acc = 0.0;
  for (long i = 0; i < fanout; ++i) {
    path.push_back(p.sampler(
        std::span<const double>(path.data(), static_cast<size_t>(d)), rng));
    std::span<const double> y_le_d(path.data(), static_cast<size_t>(d) + 1);
    if (d == D) {
      acc += p.terminal_fn(y_le_d);
    } else {
      double inner = oracle_rec(p, d + 1, path, fanout, rng);
      acc += p.stage_fn(d, y_le_d, inner);
    }
    path.pop_back();
  }
  return acc / static_cast<double>(fanout);
}

}  // namespace

double gamma_oracle(const NestedProblem& problem, const History& history,
                    long fanout, RngStream& rng) {
  if (fanout < 1) {
    throw ParameterError("gamma_oracle: fanout must be >= 1");
  }
  if (history.stage() > problem.horizon) {
    throw ParameterError("gamma_oracle: stage exceeds horizon");
  }
  std::vector<double> path = history.values;
  path.reserve(static_cast<size_t>(problem.horizon) + 1);
  return oracle_rec(problem, history.stage(), path, fanout, rng);
}

}  // namespace nestor
