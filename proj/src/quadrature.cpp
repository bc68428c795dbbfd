#include "nestor/quadrature.hpp"

#include <cmath>
#include <cstdlib>

#include "nestor/errors.hpp"

namespace nestor {

// Nodes and weights of the n-point physicists' Gauss-Hermite rule
// (weight e^{-x^2}) by Newton iteration on the recurrence, then rescaled
// to the probabilists' normal weight.
GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ParameterError("gauss_hermite: n must be >= 1");
  std::vector<double> x(n), w(n);
  const double eps = 3e-14;
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 0.7511255444649425;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 -
             std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= eps) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // Physicists' rule integrates f(t) e^{-t^2} dt; substitute t = x/sqrt(2)
  // and divide by sqrt(pi) to get E[f(Z)], Z ~ N(0,1).
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double inv_sqrt_pi = 0.5641895835477563;
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = x[i] * std::sqrt(2.0);
    rule.weights[i] = w[i] * inv_sqrt_pi;
  }
  return rule;
}

}  // namespace nestor
