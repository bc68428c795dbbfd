#pragma once

#include <vector>

namespace nestor {

// Gauss-Hermite rule adapted to the standard normal weight:
//   E[f(Z)] for Z ~ N(0,1)  ~=  sum_i weights[i] * f(nodes[i])
// Weights sum to 1.  Accurate to machine precision for smooth f at
// modest node counts (the rule is exact for polynomials up to degree
// 2n-1 and converges super-exponentially for analytic integrands).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int n);

// E[f(mu + Z)] for Z ~ N(0,1) under the given rule.
template <typename F>
double normal_expectation(const GaussHermiteRule& rule, double mu, F&& f) {
  double acc = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mu + rule.nodes[i]);
  }
  return acc;
}

}  // namespace nestor
