#pragma once

#include <string>
#include <vector>

#include "nestor/problem.hpp"

namespace nestor {

// Built-in problems:
//   "identity-chain"   g_d(y,z) = z, g_D = y_D, point-mass process at 0.7;
//                      every estimator is exact (truth 0.7).
//   "gauss-rne-D1/2/3" AR(1) process y_d = 0.6 y_{d-1} + N(0,1) (y_0 ~
//                      N(0,1)); g_d(y,z) = softplus(z) - log 2
//                      + 0.2 tanh(y_d) (1-Lipschitz, smooth), terminal
//                      tanh(y_D); truth by nested Gauss-Hermite
//                      quadrature.
//   "gauss-optstop-D2" same process; g_d(y,z) = max(y_d, z) (kinked,
//                      1-Lipschitz), terminal y_2; truth from the
//                      closed-form Gaussian max-expectation
//                      E[max(a, N(mu, s^2))] = a Phi((a-mu)/s)
//                      + mu Phi((mu-a)/s) + s phi((a-mu)/s) composed with
//                      one outer numerical integral.
const NestedProblem& find_problem(const std::string& id);

std::vector<std::string> list_problems();

// Ground-truth value gamma_0 of a built-in problem, computed
// deterministically and cached.  Every truth is gated by recomputing at
// doubled resolution and requiring agreement; the gate guarantees the
// reference error is far below any tolerance the tests use.
double problem_truth(const std::string& id);

// Closed-form E[max(a, X)] for X ~ N(mu, sigma^2); exposed for tests.
double gaussian_max_expectation(double a, double mu, double sigma);

}  // namespace nestor
