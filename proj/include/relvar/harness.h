#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relvar/errors.h"
#include "relvar/kernels.h"
#include "relvar/simulate.h"

namespace relvar {

// Monte Carlo experiment runner: each limit theorem becomes a seeded,
// parallel, desk-scale experiment with a machine-readable report.

enum class ExperimentKind {
  consistency,
  clt_coverage,
  test_size,
  test_power,
  scaling,
  nu_recovery,
  drift_negligibility,
};

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

// A simulable model: Brownian semimartingale or gamma-kernel BSS process,
// with a volatility and drift specification.
struct ModelSpec {
  enum class Process { semimartingale, bss };

  Process process = Process::semimartingale;
  std::optional<GammaKernelParams> kernel;  // required for bss
  VolatilityModel vol = VolatilityModel::constant_vol(1.0);
  DriftModel drift = DriftModel::none_drift();
  int refine = 10;  // inner-grid refinement for bss simulation

  // smoothness index driving scaling targets and drift predicates
  double nu() const;
  void validate() const;
};

// Every bound a report asserts against comes from here, so each pass/fail
// line can cite the tolerance that produced it.
struct Tolerances {
  double median_sup = 0.05;     // consistency: median sup deviation, finest lag
  double coverage_half = 0.025; // clt: |coverage - (1 - level)| bound
  double student_mean = 0.1;    // clt: |mean| of studentised statistic
  double student_var = 0.2;     // clt: |var - 1| of studentised statistic
  double size_lo = 0.03;        // test: rejection-rate band under H0
  double size_hi = 0.08;
  double power_min = 0.90;      // test: minimum rejection rate under H1
  double ks_distance = 0.05;    // test: empirical null vs limit CDF
  double slope_tol = 0.05;      // scaling: |median slope - target|
  double nu_abs = 0.05;         // nu recovery: median |nu^ - nu|
  double drift_sup = 0.02;      // drift: median sup coupled difference, finest lag

  void validate() const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::consistency;
  ModelSpec model;                      // H0 / primary model
  std::vector<ModelSpec> alternatives;  // H1 models (test-power)

  double horizon = 1.0;
  int n_obs = 4000;            // observations per path (increments)
  std::vector<int> lags = {1}; // lag schedule, strictly decreasing
  int replicates = 200;
  std::uint64_t seed = 1;
  double p = 2.0;
  double level = 0.05;      // test / CI level
  double eval_time = 0.5;   // interior time for clt-coverage
  LimitKind limit = LimitKind::consistency;  // drift-negligibility regime
  std::optional<double> scaling_target;      // override; default from model
  Tolerances tol;
  int threads = 0;  // parallelism hint; 0 = hardware concurrency

  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

struct ReplicateSummary {
  std::uint64_t replicate = 0;  // RNG stream index
  std::string group = "h0";     // model group within the experiment
  bool valid = true;
  std::string note;  // failure reason when invalid
  std::map<std::string, double> stats;
};

// One asserted bound: passes iff lo <= observed <= hi (and observed finite).
struct Criterion {
  std::string name;
  double observed = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateSummary> replicates;
  std::map<std::string, double> aggregates;
  std::vector<std::string> notes;
  std::vector<Criterion> criteria;
  bool passed = true;
  double wall_seconds = 0.0;

  // versioned JSON; timing is the only non-deterministic field
  std::string to_json(bool with_timing = true) const;
};

// sup_t |y~_t - exact sigma~^{p+}| per replicate per lag; asserts the median
// shrinks along the lag schedule and meets tol.median_sup at the finest lag.
ExperimentReport run_consistency(const ExperimentConfig& cfg);

// CI coverage and studentised moments at an interior time.
ExperimentReport run_clt_coverage(const ExperimentConfig& cfg);

// Rejection rates under H0 (size) and each alternative (power), plus the
// distance between the empirical null statistics and the limit law.
ExperimentReport run_test_size_power(const ExperimentConfig& cfg);

// Log-log slope of terminal variation against the lag schedule.
ExperimentReport run_scaling(const ExperimentConfig& cfg);

// Change-of-frequency recovery of the smoothness index.
ExperimentReport run_nu_recovery(const ExperimentConfig& cfg);

// Coupled drift/no-drift comparison on identical driving noise; bounds are
// asserted only when the negligibility predicate holds.
ExperimentReport run_drift_negligibility(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

namespace detail {

// Runs work(rep, out) for rep in [first, first + count) across threads into
// pre-sized slots; exceptions mark the replicate invalid and the run go on.
std::vector<ReplicateSummary> replicate_map(
    int count, std::uint64_t first, int threads, const std::string& group,
    const std::function<void(std::uint64_t rep, ReplicateSummary& out)>& work);

double median_of(std::vector<double> values);  // average-of-middle for even n

}  // namespace detail

}  // namespace relvar
