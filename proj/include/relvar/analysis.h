#pragma once

#include <limits>
#include <string>
#include <vector>

#include "relvar/inference.h"
#include "relvar/simulate.h"
#include "relvar/variation.h"

namespace relvar {

struct AnalysisOptions {
  double p = 2.0;
  double level = 0.05;  // test / band level
  InferenceMode mode = InferenceMode::bss_plugin;
  double subperiod = 0.0;    // window length in time units, 0 = whole series
  int min_increments = 100;  // per window, after any subsampling

  void validate() const;
};

// One analysed window: smoothness estimate, plug-in variance constant,
// relative variation curve with its confidence band, and both test verdicts.
// Windows the pipeline cannot analyse (zero variation, regime failures) are
// reported as skipped rather than aborting the run.
struct SubperiodResult {
  int index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  bool skipped = false;
  std::string note;
  double zero_increment_fraction = 0.0;
  double nu_hat = std::numeric_limits<double>::quiet_NaN();  // NaN under sm mode
  double lambda = 0.0;
  LambdaSource lambda_source = LambdaSource::analytic;
  TestResult ks;
  TestResult cvm;
  bool ks_rejected = false;   // at the configured level
  bool cvm_rejected = false;
  RelativeVariation rel;
  ConfidenceBand band;
};

struct AnalysisReport {
  double delta = 0.0;
  double p = 2.0;
  double level = 0.05;
  InferenceMode mode = InferenceMode::bss_plugin;
  int analysed = 0;
  int skipped = 0;
  double frac_reject_ks = 0.0;   // among analysed windows
  double frac_reject_cvm = 0.0;
  std::vector<SubperiodResult> subperiods;

  std::string to_json() const;  // scalar fields only; curves go to CSV/SVG
};

AnalysisReport analyze_series(const SamplePath& series, const AnalysisOptions& opt);

}  // namespace relvar
