#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relvar/kernels.h"
#include "relvar/simulate.h"
#include "relvar/variation.h"

namespace relvar {

// Pointwise confidence band for the relative power variation at interior grid
// times; bounds are clipped to [0,1], the parameter space of the limit.
struct ConfidenceBand {
  double p = 2.0;
  double delta = 0.0;
  double level = 0.95;  // 1 - a
  Eigen::ArrayXd times;
  Eigen::ArrayXd estimate;
  Eigen::ArrayXd lower;
  Eigen::ArrayXd upper;
};

enum class TestVariant { ks, cvm };
enum class LambdaSource { analytic, nu_hat_plugin };

inline const std::vector<double> kDefaultTestLevels = {0.10, 0.05, 0.01};

struct TestResult {
  TestVariant variant = TestVariant::ks;
  double statistic = 0.0;
  double p_value = 1.0;
  // the CvM table resolves p-values only down to its grid; below that the
  // p_value field holds the resolution bound itself
  bool p_value_is_bound = false;
  LambdaSource lambda_source = LambdaSource::analytic;
  double lambda = 0.0;
  std::vector<double> levels;
  std::vector<double> critical_values;
  std::vector<bool> reject;
};

// V_t(delta): feasible estimate of the asymptotic variance of the relative
// power variation, built from the realised p- and 2p-variations only.  Zero
// at both endpoints.
double asy_variance_estimator(const SamplePath& path, int lag_multiple, double p, double t,
                              double lambda_x);

// Pointwise intervals  y~ -+ z_{1-a/2} sqrt(delta V_t(delta))  clipped to [0,1].
ConfidenceBand confidence_band(const SamplePath& path, int lag_multiple, double p, double a,
                               double lambda_x);

enum class CofVariant { non_overlapping, overlapping };

// Change-of-frequency estimate of the kernel smoothness: compares order-2
// quadratic variations at lags delta and 2 delta,
//   nu^ = 1 + log2(RV2(2 delta) / RV2(delta)) / 2          (non-overlapping)
//   nu^ = 1/2 + log2(MS2(2 delta) / MS2(delta)) / 2        (overlapping mean squares)
// The overlapping variant uses every start index instead of disjoint blocks;
// both are consistent under the gamma-kernel model.
double cof_estimate_nu(const SamplePath& path, int lag_multiple,
                       CofVariant variant = CofVariant::non_overlapping);

// S^KS = m_p sqrt(T/(delta lambda)) * sup_k |y~_k - k/n|, with p-value from
// the Kolmogorov limit law.
TestResult ks_statistic(const SamplePath& path, int lag_multiple, double p, double lambda_x,
                        LambdaSource source = LambdaSource::analytic,
                        const std::vector<double>& levels = kDefaultTestLevels);

// S^CvM = (m_p^2 / lambda) * sum_k (y~_k - k/n)^2, with p-value from the
// squared-bridge-integral law.
TestResult cvm_statistic(const SamplePath& path, int lag_multiple, double p, double lambda_x,
                         LambdaSource source = LambdaSource::analytic,
                         const std::vector<double>& levels = kDefaultTestLevels);

// P(sup |bridge| <= x) = 1 - 2 sum_k (-1)^{k-1} e^{-2 k^2 x^2}; the dual theta
// representation takes over below x = 1 where the direct series loses
// accuracy.
double ks_limit_cdf(double x);

// Inverse of ks_limit_cdf by bisection.
double ks_limit_quantile(double u);

// CDF of int_0^1 (brownian bridge)^2: interpolated from the shipped Monte
// Carlo quantile table by default.
double cvm_limit_cdf(double x);

// Independent route: the classical Bessel-K series for the same law.
double cvm_limit_cdf_series(double x);

// Monte Carlo quantile table for the squared-bridge integral.  The embedded
// instance is built once (lazily, thread-safe); tables can also be loaded
// from the CSV artifact they are shipped as.
class CvmTable {
 public:
  static const CvmTable& instance();
  static CvmTable from_csv(const std::string& path);

  double cdf(double x) const;
  double quantile(double u) const;  // u in (0,1)
  double resolution() const { return 1.0 / double(quantiles_.size() + 1); }
  const std::string& build_info() const { return build_info_; }
  std::size_t size() const { return quantiles_.size(); }

 private:
  CvmTable(std::vector<double> q, std::string info);
  std::vector<double> quantiles_;  // quantile at u = (j+1) * resolution
  std::string build_info_;
};

enum class InferenceMode { semimartingale, bss_plugin };

// The CLT variance constant to studentise with: m_{2p} - m_p^2 for
// semimartingales, lambda_p(nu^) with the change-of-frequency plug-in for
// rough BSS paths.  A plug-in nu^ outside (1/2, 1) is a regime violation; a
// nu^ inside but within 0.01 of the boundary is clamped with a warning.
double lambda_for_inference(const SamplePath& path, int lag_multiple, double p,
                            InferenceMode mode);

// sup_x |F_empirical(x) - cdf(x)| over the sample points; handy for
// distribution-level tests of simulated statistics.
double empirical_ks_distance(std::vector<double> sample,
                             const std::function<double(double)>& cdf);

}  // namespace relvar
