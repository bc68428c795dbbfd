#include "nestor/registry.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "nestor/errors.hpp"
#include "nestor/quadrature.hpp"

namespace nestor {

namespace {

constexpr double kAr = 0.6;       // AR(1) coefficient of the built-ins
constexpr double kPointMass = 0.7;
constexpr double kLog2 = 0.6931471805599453;

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

NestedProblem make_identity_chain() {
  NestedProblem p;
  p.horizon = 2;
  p.lipschitz = {1.0, 1.0, 1.0};
  p.stage_fn = [](int, std::span<const double>, double z) { return z; };
  p.terminal_fn = [](std::span<const double> y) { return y.back(); };
  p.sampler = [](std::span<const double>, RngStream&) { return kPointMass; };
  p.terminal_l2_bound = 1.0;
  p.stage_zero_l2_bound = 1.0;
  return p;
}

double ar_sampler(std::span<const double> prefix, RngStream& rng) {
  double prev = prefix.empty() ? 0.0 : prefix.back();
  return kAr * prev + rng.normal();
}

NestedProblem make_gauss_rne(int horizon) {
  NestedProblem p;
  p.horizon = horizon;
  p.lipschitz.assign(static_cast<size_t>(horizon) + 1, 1.0);
  p.stage_fn = [](int d, std::span<const double> y, double z) {
    return softplus(z) - kLog2 + 0.2 * std::tanh(y[static_cast<size_t>(d)]);
  };
  p.terminal_fn = [](std::span<const double> y) {
    return std::tanh(y.back());
  };
  p.sampler = ar_sampler;
  p.terminal_l2_bound = 1.0;   // |tanh| <= 1
  p.stage_zero_l2_bound = 0.2; // |g_d(y, 0)| = 0.2 |tanh(y_d)|
  return p;
}

NestedProblem make_gauss_optstop() {
  NestedProblem p;
  p.horizon = 2;
  p.lipschitz = {1.0, 1.0, 1.0};
  p.stage_fn = [](int d, std::span<const double> y, double z) {
    return std::max(y[static_cast<size_t>(d)], z);
  };
  p.terminal_fn = [](std::span<const double> y) { return y.back(); };
  p.sampler = ar_sampler;
  // sqrt(E[y_2^2 | y_1]) = sqrt(0.36 y_1^2 + 1): a uniform constant bound
  // does not exist, so this is a high-probability bound (valid for
  // |y_1| <= 3.9, i.e. all but ~8e-4 of the mass of y_1).
  p.terminal_l2_bound = 2.5;
  p.stage_zero_l2_bound = 1.5;  // sqrt(E[max(y_d, 0)^2]) <= sd(y_d) < 1.2
  return p;
}

// gamma_0 of an AR(1)/Gauss-Hermite chain: u_d(x) is the stage-d value
// given y_{d-1} = x, composed top-down with n-node quadrature.  Built-in
// stage functions read only y_d, so a scratch path with just that slot
// set is sufficient.
double gauss_chain_value(const NestedProblem& p, int d, double x_prev,
                         const GaussHermiteRule& rule,
                         std::vector<double>& scratch) {
  const int D = p.horizon;
  return normal_expectation(rule, kAr * x_prev, [&](double y) {
    scratch[static_cast<size_t>(d)] = y;
    std::span<const double> y_le_d(scratch.data(),
                                   static_cast<size_t>(d) + 1);
    if (d == D) return p.terminal_fn(y_le_d);
    double inner = gauss_chain_value(p, d + 1, y, rule, scratch);
    return p.stage_fn(d, y_le_d, inner);
  });
}

double gauss_rne_truth(int horizon, int nodes) {
  NestedProblem p = make_gauss_rne(horizon);
  GaussHermiteRule rule = gauss_hermite(nodes);
  std::vector<double> scratch(static_cast<size_t>(horizon) + 1, 0.0);
  return gauss_chain_value(p, 0, 0.0, rule, scratch);
}

// gauss-optstop-D2 truth through the closed form:
//   u_2(x) = E[y_2 | y_1 = x] = 0.6 x
//   u_1(x) = E[max(Y, 0.6 Y)] with Y ~ N(0.6 x, 1)
//          = 0.6 mu + 0.4 E[Y^+] = 0.6 mu + 0.4 (mu Phi(mu) + phi(mu)),
//            mu = 0.6 x
//   gamma_0 = E[max(y_0, u_1(y_0))], y_0 ~ N(0, 1)
// The last integrand has one kink at y* solving y = u_1(y); integrate
// each smooth piece by composite Simpson.
double optstop_u1(double x) {
  double mu = kAr * x;
  return kAr * mu + 0.4 * gaussian_max_expectation(0.0, mu, 1.0);
}

double simpson(double a, double b, int intervals,
               const std::function<double(double)>& f) {
  if (intervals % 2 != 0) ++intervals;
  double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

double optstop_truth(int intervals) {
  // Root of y = u_1(y); the gap y - u_1(y) is strictly increasing.
  double lo = -5.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    ((mid - optstop_u1(mid) < 0.0) ? lo : hi) = mid;
  }
  double root = 0.5 * (lo + hi);
  auto below = [](double y) { return optstop_u1(y) * normal_pdf(y); };
  auto above = [](double y) { return y * normal_pdf(y); };
  return simpson(-10.0, root, intervals, below) +
         simpson(root, 10.0, intervals, above);
}

}  // namespace

double gaussian_max_expectation(double a, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
  double t = (a - mu) / sigma;
  return a * normal_cdf(t) + mu * normal_cdf(-t) + sigma * normal_pdf(t);
}

const NestedProblem& find_problem(const std::string& id) {
  static std::map<std::string, NestedProblem> registry = [] {
    std::map<std::string, NestedProblem> m;
    m["identity-chain"] = make_identity_chain();
    m["gauss-rne-D1"] = make_gauss_rne(1);
    m["gauss-rne-D2"] = make_gauss_rne(2);
    m["gauss-rne-D3"] = make_gauss_rne(3);
    m["gauss-optstop-D2"] = make_gauss_optstop();
    return m;
  }();
  auto it = registry.find(id);
  if (it == registry.end()) {
    std::string names;
    for (const auto& [name, _] : registry) {
      if (!names.empty()) names += ", ";
      names += name;
    }
    throw ParameterError("unknown problem '" + id + "' (registered: " +
                         names + ")");
  }
  return it->second;
}

std::vector<std::string> list_problems() {
  return {"identity-chain", "gauss-rne-D1", "gauss-rne-D2", "gauss-rne-D3",
          "gauss-optstop-D2"};
}

double problem_truth(const std::string& id) {
  static std::mutex mu;
  static std::map<std::string, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(id); it != cache.end()) return it->second;

  double coarse, fine;
  if (id == "identity-chain") {
    coarse = fine = kPointMass;
  } else if (id == "gauss-rne-D1" || id == "gauss-rne-D2" ||
             id == "gauss-rne-D3") {
    int horizon = id.back() - '0';
    int nodes = (horizon >= 3) ? 40 : 64;
    coarse = gauss_rne_truth(horizon, nodes);
    fine = gauss_rne_truth(horizon, 2 * nodes);
  } else if (id == "gauss-optstop-D2") {
    coarse = optstop_truth(4000);
    fine = optstop_truth(8000);
  } else {
    find_problem(id);  // throws with the registry listing
    throw ParameterError("no ground truth registered for '" + id + "'");
  }
  if (std::abs(fine - coarse) > 1e-8) {
    throw std::runtime_error(
        "ground truth for '" + id +
        "' failed the resolution-doubling gate: " + std::to_string(coarse) +
        " vs " + std::to_string(fine));
  }
  cache[id] = fine;
  return fine;
}

}  // namespace nestor
