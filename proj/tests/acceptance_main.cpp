// Acceptance gate: runs the nine release criteria end to end and prints
// one PASS/FAIL line per criterion.  Exits nonzero if any criterion
// fails.  Criterion 7's verdict is computed faithfully at the pinned
// grid; where a sub-check cannot be run at desk scale the required cost
// is printed instead of silently shrinking the experiment.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "nestor/bench.hpp"
#include "nestor/classical.hpp"
#include "nestor/qamc.hpp"
#include "nestor/quantum.hpp"
#include "nestor/registry.hpp"
#include "nestor/schedule.hpp"

using namespace nestor;

namespace {

constexpr const char* kArtifactDir = "acceptance_artifacts";

struct Stats {
  long long n = 0;
  double sum = 0.0, sq = 0.0;
  void add(double x) {
    ++n;
    sum += x;
    sq += x * x;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double var() const {
    double m = mean();
    return std::max(0.0, sq / static_cast<double>(n) - m * m);
  }
  double se() const { return std::sqrt(var() / static_cast<double>(n)); }
};

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---- criterion 1: parameter identities ---------------------------------

Verdict criterion1() {
  Verdict v;
  for (int d = 0; d <= 6; ++d) {
    for (double delta = 0.05; delta < 0.46; delta += 0.05) {
      RateSolution rs = solve_rate(d, delta);
      double q = 1.0 - rs.rate;
      double lhs = q * std::exp2(1.0 + delta / std::exp2(d + 1));
      double rhs = std::pow(q, -1.0 + delta / std::exp2(d)) *
                   std::exp2(-1.0 - delta / std::exp2(d + 1));
      if (std::abs(lhs - rhs) > 1e-12) {
        v.fail(fmt("rate identity off at d=%d delta=%.2f (|diff|=%.2e)", d,
                   delta, std::abs(lhs - rhs)));
      }
      if (!(rs.rho < 1.0)) {
        v.fail(fmt("contraction factor >= 1 at d=%d delta=%.2f", d, delta));
      }
    }
  }
  int combos = 0;
  for (int d : {0, 1, 2, 3, 4}) {
    for (double delta : {0.1, 0.25, 0.4}) {
      for (double lip : {1.0, 2.0}) {
        for (double eps : {0.3, 0.1, 0.05, 0.02, 0.01}) {
          LevelSchedule s = make_schedule(d, delta, lip, eps, true);
          for (long long c : s.per_level) {
            if (c < 1) {
              v.fail(fmt("floor guard broken at d=%d delta=%.2f L=%.0f "
                         "eps=%.2f",
                         d, delta, lip, eps));
            }
          }
          ++combos;
        }
      }
    }
  }
  if (combos < 50) v.fail("floor-guard grid has fewer than 50 points");
  if (truncation_level(1.0, 0.5) != 4) v.fail("B(1, 0.5) != 4");
  if (truncation_level(2.0, 0.01) != 18) v.fail("B(2, 0.01) != 18");
  long long m = replication_count(1, 0.25, 1.0, 0.1);
  if (m < 1789 || m != 2162) {
    v.fail(fmt("M(1, 0.25, 1, 0.1) = %lld (expected 2162, floor >= 1789)",
               m));
  }
  if (replication_count(0, 0.25, 1.0, 0.01) != 8000000) {
    v.fail("M(0, 0.25, 1, 0.01) != 8e6");
  }
  QamcConfig cfg;
  if (qamc_eps_delta_charge(1.0, 0.1, 0.05, cfg) != 30) {
    v.fail("eps-delta charge at ratio 10, delta 0.05 != 30");
  }
  if (qamc_rmse_charge(10.0, 1.0, cfg) != 34) {
    v.fail("RMSE charge at ratio 10 != 34");
  }
  auto [k, mm] = qamc_mom_params(1.0, 0.5, 0.5);
  if (k != 6 || mm != 16) v.fail("median-of-means params != (6, 16)");
  if (v.pass) {
    v.note(fmt("rate identities <= 1e-12 on 63-point grid, floor guard on "
               "%d-point grid, frozen schedule/charge values reproduced",
               combos));
  }
  return v;
}

// ---- criterion 2: unbiasedness -----------------------------------------

Verdict criterion2() {
  Verdict v;
  const NestedProblem& p = find_problem("gauss-rne-D1");
  double truth = problem_truth("gauss-rne-D1");
  const int runs = 100000;

  RateSolution rs = solve_rate(0, 0.25);
  LevelDistribution dist = LevelDistribution::geometric(rs.rate);
  Stats alg1;
  {
    RngStream rng(20001);
    CostLedger led;
    for (int i = 0; i < runs; ++i) {
      alg1.add(rmlmc_single(p, 0, History{}, dist, rng, led));
    }
  }
  double dev1 = std::abs(alg1.mean() - truth);
  if (dev1 >= 3 * alg1.se()) {
    v.fail(fmt("single-sample estimator: |mean-truth| = %.4g >= 3 SE = "
               "%.4g",
               dev1, 3 * alg1.se()));
  }

  Stats alg2;
  {
    CostLedger led;
    for (int i = 0; i < runs; ++i) {
      RngStream rng = RngStream::for_replication(20002, i);
      alg2.add(rmlmc_estimate(p, 0, History{}, 0.5,
                              LevelDistribution::Kind::Geometric, 0.25, rng,
                              led)
                   .estimate);
    }
  }
  double dev2 = std::abs(alg2.mean() - truth);
  if (dev2 >= 3 * alg2.se()) {
    v.fail(fmt("batched geometric estimator: |mean-truth| = %.4g >= 3 SE = "
               "%.4g",
               dev2, 3 * alg2.se()));
  }
  if (v.pass) {
    v.note(fmt("1e5 runs each: single-sample dev %.4g (3 SE %.4g), batched "
               "dev %.4g (3 SE %.4g)",
               dev1, 3 * alg1.se(), dev2, 3 * alg2.se()));
  }
  return v;
}

// ---- criterion 3: truncation bias bound --------------------------------

Verdict criterion3() {
  Verdict v;
  const NestedProblem& p = find_problem("gauss-rne-D1");
  double truth = problem_truth("gauss-rne-D1");
  for (double eps : {0.2, 0.1}) {
    int b = truncation_level(1.0, eps);
    double bound = 2.0 * std::exp2(-0.5 * b);
    Stats st;
    CostLedger led;
    for (int i = 0; i < 200; ++i) {
      RngStream rng = RngStream::for_replication(30000, i);
      st.add(rmlmc_estimate(p, 0, History{}, eps,
                            LevelDistribution::Kind::Truncated, 0.25, rng,
                            led)
                 .estimate);
    }
    double bias = std::abs(st.mean() - truth);
    double allowed = bound + 3 * st.se();
    if (bias > allowed) {
      v.fail(fmt("eps=%.2f: |bias| %.4g > 2L 2^{-B/2} + 3 SE = %.4g", eps,
                 bias, allowed));
    } else {
      v.note(fmt("eps=%.2f bias %.4g <= %.4g", eps, bias, allowed));
    }
  }
  return v;
}

// ---- criterion 4: telescoping identity ---------------------------------

Verdict criterion4() {
  Verdict v;
  const NestedProblem& p = find_problem("gauss-rne-D2");
  const double delta = 0.25;
  InnerEstimator inner = [&p, delta](const History& y, double eps,
                                     RngStream& rng, CostLedger& led) {
    double e = std::min(eps, 1.0 - 1e-12);
    return rmlmc_estimate(p, 1, y, e, LevelDistribution::Kind::Truncated,
                          delta, rng, led)
        .estimate;
  };
  const int b = truncation_level(1.0, 0.5);
  const int reps = 3000;
  Stats lhs_st, rhs_st;
  RngStream rng(40001);
  CostLedger led;
  for (int i = 0; i < reps; ++i) {
    History y{{sample_next(p, History{}, rng, led)}};
    double lhs = 0.0;
    for (int n = 0; n <= b; ++n) {
      lhs += delta_successive(p, 0, y, n, std::exp2(-0.5 * n),
                              std::exp2(-0.5 * (n - 1)), inner, rng, led);
    }
    lhs_st.add(lhs);

    History y2{{sample_next(p, History{}, rng, led)}};
    RngStream sub = rng.split();
    double r = inner(y2, std::exp2(-0.5 * b), sub, led);
    rhs_st.add(p.stage_fn(
        0, std::span<const double>(y2.values.data(), 1), r));
  }
  double gap = std::abs(lhs_st.mean() - rhs_st.mean());
  double combined =
      std::sqrt(lhs_st.var() / reps + rhs_st.var() / reps);
  if (gap >= 4 * combined) {
    v.fail(fmt("level sum vs direct estimate: gap %.4g >= 4 combined SE "
               "%.4g",
               gap, 4 * combined));
  } else {
    v.note(fmt("B=%d, %d reps: gap %.4g < 4 combined SE %.4g", b, reps, gap,
               4 * combined));
  }
  return v;
}

// ---- criterion 5: derandomized error and cost slope --------------------

Verdict criterion5() {
  Verdict v;
  ExperimentConfig cfg;
  cfg.problem_id = "gauss-rne-D2";
  cfg.estimator = "alg3";
  cfg.eps_grid = {0.2, 0.1, 0.05};
  cfg.reps = 200;
  cfg.seed = 50001;
  cfg.force = true;  // ~3.2e10 steps total, accepted for the gate
  cfg.output_dir = kArtifactDir;
  std::vector<ConvergenceRow> rows = run_study(cfg);
  for (const ConvergenceRow& r : rows) {
    if (r.empirical_rmse > 2.0 * r.eps) {
      v.fail(fmt("eps=%.2f: L2 error %.4g > 2 eps", r.eps,
                 r.empirical_rmse));
    } else {
      v.note(fmt("eps=%.2f L2 %.4g <= %.2f", r.eps, r.empirical_rmse,
                 2.0 * r.eps));
    }
  }
  // Expected exponent 2(1 + delta/2^{d-1}) = 3.0 at d = 0, delta = 0.25.
  // One log factor rides on the leading term at this depth; fitting the
  // log-compensated cost isolates the power.
  auto [slope, r2] = fit_slope(rows, "classical_steps_mean", 1);
  if (std::abs(slope - 3.0) > 0.4) {
    v.fail(fmt("cost slope %.3f outside 3.0 +/- 0.4 (r2 %.3f)", slope, r2));
  } else {
    v.note(fmt("cost slope %.3f in 3.0 +/- 0.4 (r2 %.3f)", slope, r2));
  }
  emit_plot(rows, "cost_vs_eps",
            std::string(kArtifactDir) + "/alg3_cost_vs_eps.svg");
  return v;
}

// ---- criterion 6: QAMC emulator contracts ------------------------------

Verdict criterion6() {
  Verdict v;
  QamcConfig cfg;
  struct Sampler {
    const char* name;
    double mean;
    double s_bound;
    QSampler fn;
  };
  std::vector<Sampler> samplers;
  samplers.push_back({"shifted-gaussian", 0.5, 1.2,
                      [](RngStream& r, CostLedger& l) {
                        l.add_step();
                        return 0.5 + r.normal();
                      }});
  samplers.push_back({"bernoulli(0.3)", 0.3, 0.6,
                      [](RngStream& r, CostLedger& l) {
                        l.add_step();
                        return (r.uniform() < 0.3) ? 1.0 : 0.0;
                      }});
  samplers.push_back({"uniform(0,1)", 0.5, 0.6,
                      [](RngStream& r, CostLedger& l) {
                        l.add_step();
                        return r.uniform();
                      }});
  samplers.push_back({"gaussian-cubed", 0.0, std::sqrt(15.0),
                      [](RngStream& r, CostLedger& l) {
                        l.add_step();
                        double z = r.normal();
                        return z * z * z;
                      }});
  const double eps = 0.1;
  const int reps = 500;
  for (const Sampler& s : samplers) {
    double sq = 0.0;
    for (int i = 0; i < reps; ++i) {
      RngStream rng = RngStream::for_replication(60001, i);
      CostLedger led;
      double err = qamc_rmse(s.fn, s.s_bound, eps, cfg, rng, led) - s.mean;
      sq += err * err;
    }
    double rmse = std::sqrt(sq / reps);
    if (rmse > 1.15 * eps) {
      v.fail(fmt("%s: RMSE %.4g > 1.15 eps", s.name, rmse));
    }
  }
  // Charge is a deterministic function of the contract, not of the draws.
  std::uint64_t charge0 = 0;
  for (int i = 0; i < 3; ++i) {
    RngStream rng(70001 + 13 * i);
    CostLedger led;
    qamc_rmse(samplers[0].fn, 1.2, eps, cfg, rng, led);
    if (i == 0) {
      charge0 = led.quantum_charged;
    } else if (led.quantum_charged != charge0) {
      v.fail("charged cost varies with the seed");
    }
  }
  if (charge0 != qamc_rmse_charge(1.2, eps, cfg)) {
    v.fail("charged cost differs from the closed form");
  }
  // Clipping: projection onto [-s, s] (which contains the mean) cannot
  // move an estimate away from it; paired single-draw check.
  const double s = std::sqrt(15.0);
  double sq_clip = 0.0, sq_raw = 0.0;
  int engaged = 0;
  for (int i = 0; i < 4000; ++i) {
    RngStream a = RngStream::for_replication(80001, i);
    RngStream b = RngStream::for_replication(80001, i);
    CostLedger la, lb;
    double clipped = qamc_rmse(samplers[3].fn, s, s, cfg, a, la);
    double raw = samplers[3].fn(b, lb);
    if (std::abs(clipped) > std::abs(raw) + 1e-12) {
      v.fail("clipping increased the error on a paired draw");
    }
    if (std::abs(raw) > s) ++engaged;
    sq_clip += clipped * clipped;
    sq_raw += raw * raw;
  }
  if (engaged == 0) v.fail("clipping never engaged on the heavy tail");
  if (sq_clip > sq_raw) v.fail("clipping increased the MSE");
  if (v.pass) {
    v.note(fmt("4 samplers x %d reps within 1.15 eps; charge "
               "bit-deterministic; clipping engaged %d/4000 times, MSE "
               "ratio %.3f",
               reps, engaged, sq_clip / sq_raw));
  }
  return v;
}

// ---- criterion 7: quantum MLMC at the pinned grid ----------------------

double charge_slope(const NestedProblem& p, const std::vector<double>& grid,
                    int power) {
  QamcConfig cfg;
  std::vector<ConvergenceRow> rows;
  for (double eps : grid) {
    ConvergenceRow r;
    r.eps = eps;
    r.quantum_charged =
        static_cast<double>(qmlmc_charge(p, 0, eps, cfg));
    rows.push_back(r);
  }
  return fit_slope(rows, "quantum_charged", power).first;
}

Verdict criterion7() {
  Verdict v;
  QamcConfig cfg;
  const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025};
  const char* ids[] = {"gauss-rne-D2", "gauss-optstop-D2"};

  // (a) MSE <= 1.2 eps^2 over 200 reps at the pinned grid: report the
  // classical emulation cost this demands.
  std::printf("  [7] classical steps per replication of the emulation:\n");
  double worst = 0.0;
  for (const char* id : ids) {
    const NestedProblem& p = find_problem(id);
    for (double eps : grid) {
      double c = qmlmc_classical_cost(p, 0, eps);
      worst = std::max(worst, c);
      std::printf("  [7]   %-16s eps=%.3f  %.3e steps/rep (x200 reps)\n",
                  id, eps, c);
    }
  }
  v.fail(fmt("MSE check at the pinned grid not attempted: up to %.2e "
             "classical steps per replication (>1e4x the 1e9-step desk "
             "budget; the quantum estimator is being emulated classically)",
             worst));

  // Reduced-scale MSE diagnostic at eps = 0.5, 30 reps, both problems.
  for (const char* id : ids) {
    const NestedProblem& p = find_problem(id);
    double truth = problem_truth(id);
    const double eps = 0.5;
    double sq = 0.0;
    const int reps = 30;
    for (int i = 0; i < reps; ++i) {
      RngStream rng = RngStream::for_replication(70707, i);
      CostLedger led;
      double err =
          qmlmc_estimate(p, 0, History{}, eps, cfg, rng, led).estimate -
          truth;
      sq += err * err;
    }
    double mse = sq / reps;
    std::printf("  [7]   diagnostic %-16s eps=0.5: MSE %.4g vs 1.2 eps^2 = "
                "%.3g (%s)\n",
                id, mse, 1.2 * eps * eps,
                mse <= 1.2 * eps * eps ? "ok" : "exceeded");
  }

  // (b) Charge slope after dividing by log^{1+3(D-d)}(1/eps) = log^7.
  const NestedProblem& d2 = find_problem("gauss-rne-D2");
  double pinned = charge_slope(d2, grid, 7);
  std::printf("  [7] charge slope (log^7-corrected) on pinned grid: %.3f "
              "(target 1 +/- 0.25 in |slope|)\n",
              pinned);
  if (std::abs(pinned - 1.0) > 0.25) {
    v.fail(fmt("pinned-grid charge slope %.3f outside 1 +/- 0.25: the "
               "log^7 correction overwhelms eps^-1 at eps >= 0.025 "
               "(pre-asymptotic grid)",
               pinned));
  }
  // Asymptotic validation of the charge accounting on extended grids
  // (deterministic pre-pass, so these are cheap to evaluate).
  double s4 = charge_slope(d2, {4e-4, 2e-4, 1e-4}, 7);
  double s7 = charge_slope(d2, {4e-7, 2e-7, 1e-7}, 7);
  std::printf("  [7] extended-grid charge slopes: %.3f at eps~1e-4, %.3f "
              "at eps~1e-7 (approaching 1)\n",
              s4, s7);
  v.note(fmt("accounting trends to the predicted rate off the pinned grid "
             "(slope %.2f at eps~1e-4, %.2f at eps~1e-7)",
             s4, s7));
  return v;
}

// ---- criterion 8: direct-quantization blowup ---------------------------

Verdict criterion8() {
  Verdict v;
  QamcConfig cfg;
  DirectQuantParams params;
  const NestedProblem& p = find_problem("gauss-rne-D1");
  const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025};
  std::vector<ConvergenceRow> rows4, rows6;
  for (double eps : grid) {
    ConvergenceRow r;
    r.eps = eps;
    r.quantum_charged =
        static_cast<double>(direct_quantized_charge(p, 0, eps, params, cfg));
    rows4.push_back(r);
    r.quantum_charged = static_cast<double>(qmlmc_charge(p, 0, eps, cfg));
    rows6.push_back(r);
  }
  // Expected exponent D - d + 1 = 2, with a log^2 factor riding on it at
  // horizon 1.
  auto [corr4, r2c] = fit_slope(rows4, "quantum_charged", 2);
  auto [raw4, r2a] = fit_slope(rows4, "quantum_charged", 0);
  auto [raw6, r2b] = fit_slope(rows6, "quantum_charged", 0);
  if (std::abs(corr4 - 2.0) > 0.5) {
    v.fail(fmt("log-corrected direct-quantization slope %.3f outside 2 +/- "
               "0.5",
               corr4));
  }
  if (!(raw4 > raw6)) {
    v.fail(fmt("direct quantization not steeper: %.3f vs %.3f", raw4,
               raw6));
  }
  if (v.pass) {
    v.note(fmt("corrected slope %.3f in 2 +/- 0.5 (r2 %.3f); raw %.3f > "
               "quantum MLMC's %.3f",
               corr4, r2c, raw4, raw6));
  }
  return v;
}

// ---- criterion 9: determinism ------------------------------------------

Verdict criterion9() {
  Verdict v;
  struct Setup {
    const char* problem;
    const char* estimator;
    std::vector<double> grid;
  };
  const Setup setups[] = {
      {"gauss-rne-D1", "alg1", {0.5}},
      {"gauss-rne-D1", "alg2-geo", {0.5, 0.4}},
      {"gauss-rne-D1", "alg2-trunc", {0.5, 0.4}},
      {"gauss-rne-D1", "alg3", {0.5, 0.4}},
      {"identity-chain", "alg4", {0.5}},
      {"identity-chain", "alg6", {0.5}},
  };
  for (const Setup& s : setups) {
    ExperimentConfig cfg;
    cfg.problem_id = s.problem;
    cfg.estimator = s.estimator;
    cfg.eps_grid = s.grid;
    cfg.reps = 4;
    cfg.seed = 90001;
    cfg.write_output = false;
    cfg.workers = 1;
    auto [rows_a, reports_a] = run_study_reports(cfg);
    auto [rows_b, reports_b] = run_study_reports(cfg);  // rerun
    cfg.workers = 3;
    auto [rows_c, reports_c] = run_study_reports(cfg);  // worker count
    bool same = rows_a == rows_b && rows_a == rows_c &&
                reports_a.size() == reports_b.size() &&
                reports_a.size() == reports_c.size();
    for (size_t i = 0; same && i < reports_a.size(); ++i) {
      same = reports_a[i] == reports_b[i] && reports_a[i] == reports_c[i] &&
             std::memcmp(&reports_a[i].estimate, &reports_b[i].estimate,
                         sizeof(double)) == 0 &&
             std::memcmp(&reports_a[i].estimate, &reports_c[i].estimate,
                         sizeof(double)) == 0;
    }
    if (!same) {
      v.fail(fmt("%s/%s not reproducible across rerun/worker count",
                 s.problem, s.estimator));
    }
  }
  // CSV byte-identity across worker counts.
  ExperimentConfig cfg;
  cfg.problem_id = "gauss-rne-D1";
  cfg.estimator = "alg3";
  cfg.eps_grid = {0.5, 0.4};
  cfg.reps = 4;
  cfg.seed = 90002;
  cfg.output_dir = kArtifactDir;
  run_study(cfg);
  std::string csv =
      std::string(kArtifactDir) + "/gauss-rne-D1_alg3.csv";
  std::string bytes1;
  {
    FILE* f = fopen(csv.c_str(), "rb");
    if (f) {
      char buf[4096];
      size_t n;
      while ((n = fread(buf, 1, sizeof(buf), f)) > 0) {
        bytes1.append(buf, n);
      }
      fclose(f);
    }
  }
  cfg.workers = 3;
  run_study(cfg);
  std::string bytes2;
  {
    FILE* f = fopen(csv.c_str(), "rb");
    if (f) {
      char buf[4096];
      size_t n;
      while ((n = fread(buf, 1, sizeof(buf), f)) > 0) {
        bytes2.append(buf, n);
      }
      fclose(f);
    }
  }
  if (bytes1.empty() || bytes1 != bytes2) {
    v.fail("CSV bytes differ across worker counts");
  }
  if (v.pass) {
    v.note("6 estimators bit-identical across rerun and workers 1 vs 3; "
           "CSV bytes identical");
  }
  return v;
}

}  // namespace

int main() {
  std::filesystem::create_directories(kArtifactDir);
  struct Entry {
    int id;
    const char* title;
    Verdict (*fn)();
  };
  const Entry entries[] = {
      {1, "parameter identities", criterion1},
      {2, "unbiasedness", criterion2},
      {3, "truncation bias bound", criterion3},
      {4, "telescoping identity", criterion4},
      {5, "derandomized error and cost slope", criterion5},
      {6, "quantum mean-estimation contracts", criterion6},
      {7, "quantum MLMC at the pinned grid", criterion7},
      {8, "direct-quantization blowup", criterion8},
      {9, "determinism", criterion9},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = e.fn();
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (!v.pass) ++failures;
    std::printf("CRITERION %d: %s — %s (%s, %.1fs)\n", e.id,
                v.pass ? "PASS" : "FAIL", e.title, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/9 criteria passed\n",
              9 - failures);
  return failures == 0 ? 0 : 1;
}
