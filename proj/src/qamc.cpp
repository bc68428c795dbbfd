#include "nestor/qamc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nestor/errors.hpp"

namespace nestor {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw ParameterError(std::string(name) + " must be > 0");
  }
}

std::uint64_t ceil_u64(double x) {
  return static_cast<std::uint64_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::uint64_t qamc_eps_delta_charge(double sigma, double eps,
                                    double delta_fail,
                                    const QamcConfig& config) {
  check_positive(sigma, "sigma");
  check_positive(eps, "eps");
  if (!(delta_fail > 0.0 && delta_fail < 1.0)) {
    throw ParameterError("delta_fail must lie in (0, 1)");
  }
  std::uint64_t q =
      ceil_u64(config.kappa * (sigma / eps) * std::log(1.0 / delta_fail));
  return std::max(config.min_charge, q);
}

std::uint64_t qamc_rmse_charge(double s_bound, double eps,
                               const QamcConfig& config) {
  check_positive(s_bound, "s_bound");
  check_positive(eps, "eps");
  double ratio = s_bound / eps;
  std::uint64_t q =
      ceil_u64(config.kappa * ratio * std::max(1.0, std::log2(ratio)));
  return std::max(config.min_charge, q);
}

std::pair<std::uint64_t, std::uint64_t> qamc_mom_params(double sigma,
                                                        double eps,
                                                        double delta_fail) {
  std::uint64_t k = ceil_u64(8.0 * std::log(1.0 / delta_fail));
  std::uint64_t m = ceil_u64(4.0 * sigma * sigma / (eps * eps));
  return {std::max<std::uint64_t>(1, k), std::max<std::uint64_t>(1, m)};
}

double qamc_eps_delta(const QSampler& sampler, double sigma, double eps,
                      double delta_fail, const QamcConfig& config,
                      RngStream& rng, CostLedger& ledger) {
  std::uint64_t charge = qamc_eps_delta_charge(sigma, eps, delta_fail,
                                               config);
  auto [k, m] = qamc_mom_params(sigma, eps, delta_fail);
  std::vector<double> means(k);
  for (std::uint64_t g = 0; g < k; ++g) {
    double acc = 0.0;
    for (std::uint64_t i = 0; i < m; ++i) {
      acc += sampler(rng, ledger);
    }
    means[g] = acc / static_cast<double>(m);
  }
  std::sort(means.begin(), means.end());
  double median = (k % 2 == 1)
                      ? means[k / 2]
                      : 0.5 * (means[k / 2 - 1] + means[k / 2]);
  ledger.charge(charge);
  return median;
}

std::uint64_t qamc_rmse_samples(double s_bound, double eps) {
  check_positive(s_bound, "s_bound");
  check_positive(eps, "eps");
  double ratio = s_bound / eps;
  return std::max<std::uint64_t>(1, ceil_u64(ratio * ratio));
}

double qamc_rmse(const QSampler& sampler, double s_bound, double eps,
                 const QamcConfig& config, RngStream& rng,
                 CostLedger& ledger) {
  std::uint64_t charge = qamc_rmse_charge(s_bound, eps, config);
  std::uint64_t n = qamc_rmse_samples(s_bound, eps);
  double acc = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    acc += sampler(rng, ledger);
  }
  double mean = acc / static_cast<double>(n);
  ledger.charge(charge);
  return std::clamp(mean, -s_bound, s_bound);
}

}  // namespace nestor
