#include "relvar/inference.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "relvar/errors.h"
#include "relvar/numeric.h"

namespace relvar {

namespace detail {
// embedded table, emitted by gen_cvm_table (src/cvm_table_data.cpp)
extern const char kCvmTableMeta[];
extern const std::size_t kCvmQuantileCount;
extern const double kCvmQuantiles[];
}  // namespace detail

namespace {

struct VariationPair {
  VariationSeries vp;   // order p
  VariationSeries v2p;  // order 2p
};

VariationPair variation_pair(const SamplePath& path, int lag_multiple, double p) {
  VariationPair out{power_variation(path, lag_multiple, p, 1),
                    power_variation(path, lag_multiple, 2.0 * p, 1)};
  if (!(out.vp.terminal() > 0.0) || !(out.v2p.terminal() > 0.0))
    throw degenerate_input_error("variance estimator: terminal variation is zero");
  return out;
}

double variance_formula(double y, double w, double vt, double wt, double delta, double m2p,
                        double lambda_x) {
  return lambda_x / (delta * m2p * vt * vt) * ((1.0 - y) * (1.0 - y) * w + y * y * (wt - w));
}

}  // namespace

double asy_variance_estimator(const SamplePath& path, int lag_multiple, double p, double t,
                              double lambda_x) {
  if (!(lambda_x > 0.0)) throw domain_error("variance estimator: lambda must be positive");
  auto [vp, v2p] = variation_pair(path, lag_multiple, p);
  const double vt = vp.terminal(), wt = v2p.terminal();
  const double y = vp.value_at(t) / vt;
  const double w = v2p.value_at(t);
  return variance_formula(y, w, vt, wt, vp.delta, abs_moment(2.0 * p), lambda_x);
}

ConfidenceBand confidence_band(const SamplePath& path, int lag_multiple, double p, double a,
                               double lambda_x) {
  if (!(a > 0.0 && a < 1.0)) throw domain_error("confidence band: level a must lie in (0,1)");
  if (!(lambda_x > 0.0)) throw domain_error("confidence band: lambda must be positive");
  auto [vp, v2p] = variation_pair(path, lag_multiple, p);
  const double vt = vp.terminal(), wt = v2p.terminal();
  const double m2p = abs_moment(2.0 * p);
  const double z = normal_quantile(1.0 - a / 2.0);
  const Eigen::Index n = vp.count();

  ConfidenceBand band;
  band.p = p;
  band.delta = vp.delta;
  band.level = 1.0 - a;
  band.times.resize(n - 1);
  band.estimate.resize(n - 1);
  band.lower.resize(n - 1);
  band.upper.resize(n - 1);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double y = vp.values[j] / vt;
    const double v = variance_formula(y, v2p.values[j], vt, wt, vp.delta, m2p, lambda_x);
    const double half = z * std::sqrt(vp.delta * v);
    band.times[j] = vp.time_of(j);
    band.estimate[j] = y;
    band.lower[j] = std::max(y - half, 0.0);
    band.upper[j] = std::min(y + half, 1.0);
  }
  return band;
}

double cof_estimate_nu(const SamplePath& path, int lag_multiple, CofVariant variant) {
  if (variant == CofVariant::non_overlapping) {
    const double fine = power_variation(path, lag_multiple, 2.0, 2).terminal();
    const double coarse = power_variation(path, 2 * lag_multiple, 2.0, 2).terminal();
    if (!(fine > 0.0) || !(coarse > 0.0))
      throw degenerate_input_error("change of frequency: a second-difference variation is zero");
    return 1.0 + 0.5 * std::log2(coarse / fine);
  }

  // overlapping variant: mean square of second differences over every start
  // index; E|d2(h)|^2 scales as h^{2 nu - 1}
  path.validate();
  const auto mean_square = [&](Eigen::Index h) {
    const Eigen::Index n = path.n_obs();
    if (n < 2 * h + 1)
      throw input_error("change of frequency: too few observations for the coarse lag");
    double acc = 0.0;
    for (Eigen::Index i = 2 * h; i < n; ++i) {
      const double d = path.values[i] - 2.0 * path.values[i - h] + path.values[i - 2 * h];
      acc += d * d;
    }
    return acc / double(n - 2 * h);
  };
  const double fine = mean_square(lag_multiple);
  const double coarse = mean_square(2 * Eigen::Index(lag_multiple));
  if (!(fine > 0.0) || !(coarse > 0.0))
    throw degenerate_input_error("change of frequency: a second-difference mean square is zero");
  return 0.5 + 0.5 * std::log2(coarse / fine);
}

namespace {

// n and the interior deviations y~_k - k/n on the decimated grid
struct Deviations {
  Eigen::Index n = 0;
  Eigen::ArrayXd dev;
};

Deviations test_deviations(const SamplePath& path, int lag_multiple, double p) {
  RelativeVariation rel = relative_power_variation(path, lag_multiple, p, 1);
  const Eigen::Index n = rel.count();
  if (n < 2) throw input_error("test statistic: need at least 2 increments at this lag");
  Deviations d;
  d.n = n;
  d.dev.resize(n - 1);
  for (Eigen::Index k = 1; k < n; ++k) d.dev[k - 1] = rel.values[k - 1] - double(k) / double(n);
  return d;
}

void attach_decisions(TestResult& r, const std::vector<double>& levels,
                      const std::function<double(double)>& quantile) {
  r.levels = levels;
  for (double a : levels) {
    const double crit = quantile(1.0 - a);
    r.critical_values.push_back(crit);
    r.reject.push_back(r.statistic > crit);
  }
}

}  // namespace

TestResult ks_statistic(const SamplePath& path, int lag_multiple, double p, double lambda_x,
                        LambdaSource source, const std::vector<double>& levels) {
  if (!(lambda_x > 0.0)) throw domain_error("ks statistic: lambda must be positive");
  Deviations d = test_deviations(path, lag_multiple, p);
  TestResult r;
  r.variant = TestVariant::ks;
  r.lambda_source = source;
  r.lambda = lambda_x;
  r.statistic =
      abs_moment(p) * std::sqrt(double(d.n) / lambda_x) * d.dev.abs().maxCoeff();
  r.p_value = 1.0 - ks_limit_cdf(r.statistic);
  attach_decisions(r, levels, [](double u) { return ks_limit_quantile(u); });
  return r;
}

TestResult cvm_statistic(const SamplePath& path, int lag_multiple, double p, double lambda_x,
                         LambdaSource source, const std::vector<double>& levels) {
  if (!(lambda_x > 0.0)) throw domain_error("cvm statistic: lambda must be positive");
  Deviations d = test_deviations(path, lag_multiple, p);
  const double mp = abs_moment(p);
  TestResult r;
  r.variant = TestVariant::cvm;
  r.lambda_source = source;
  r.lambda = lambda_x;
  r.statistic = mp * mp / lambda_x * d.dev.square().sum();
  const CvmTable& table = CvmTable::instance();
  const double pv = 1.0 - cvm_limit_cdf(r.statistic);
  if (pv < table.resolution()) {
    r.p_value = table.resolution();
    r.p_value_is_bound = true;  // really "< resolution"
  } else {
    r.p_value = pv;
  }
  attach_decisions(r, levels, [&](double u) { return table.quantile(u); });
  return r;
}

double ks_limit_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  if (x < 1.0) {
    // theta-dual form, accurate where the direct series would cancel
    const double a = M_PI * M_PI / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k < 2000; k += 2) {
      const double term = std::exp(-a * double(k) * double(k));
      s += term;
      if (term < 1e-18 * (s + 1e-300)) break;
    }
    return std::min(1.0, std::sqrt(2.0 * M_PI) / x * s);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 2000; ++k) {
    const double term = sign * std::exp(-2.0 * double(k) * double(k) * x * x);
    s += term;
    sign = -sign;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(1.0 - 2.0 * s, 0.0, 1.0);
}

double ks_limit_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw domain_error("ks limit quantile: u must lie in (0,1)");
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ks_limit_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double cvm_limit_cdf_series(double x) {
  if (!(x > 0.0)) return 0.0;
  // (1/(pi sqrt(x))) sum_j c_j sqrt(4j+1) e^{-a_j} K_{1/4}(a_j),
  // a_j = (4j+1)^2/(16x), c_0 = 1, c_{j+1} = c_j (2j+1)/(2j+2)
  double s = 0.0;
  double coef = 1.0;
  for (int j = 0; j < 120; ++j) {
    const double fourj1 = 4.0 * j + 1.0;
    const double a = fourj1 * fourj1 / (16.0 * x);
    if (a < 700.0) {
      const double term = coef * std::sqrt(fourj1) * std::exp(-a) * std::cyl_bessel_k(0.25, a);
      s += term;
      if (term < 1e-16 * (s + 1e-300) && j > 1) break;
    } else if (j > 1) {
      break;
    }
    coef *= (2.0 * j + 1.0) / (2.0 * j + 2.0);
  }
  return std::clamp(s / (M_PI * std::sqrt(x)), 0.0, 1.0);
}

CvmTable::CvmTable(std::vector<double> q, std::string info)
    : quantiles_(std::move(q)), build_info_(std::move(info)) {
  if (quantiles_.size() < 99) throw input_error("cvm table: too few quantiles");
  if (!std::is_sorted(quantiles_.begin(), quantiles_.end()))
    throw input_error("cvm table: quantiles are not monotone");
  if (!(quantiles_.front() > 0.0)) throw input_error("cvm table: quantiles must be positive");
}

const CvmTable& CvmTable::instance() {
  static const CvmTable table(
      std::vector<double>(detail::kCvmQuantiles, detail::kCvmQuantiles + detail::kCvmQuantileCount),
      detail::kCvmTableMeta);
  return table;
}

CvmTable CvmTable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cvm table: cannot open " + path);
  std::string line, info;
  std::vector<double> q;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (info.empty() && line.find("cvm-quantile-table") != std::string::npos) {
        info = line.substr(line.find("cvm-quantile-table") + 18);
        info.erase(0, info.find_first_not_of(' '));
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw input_error("cvm table: malformed line: " + line);
    q.push_back(std::stod(line.substr(comma + 1)));
  }
  return CvmTable(std::move(q), info.empty() ? "unknown provenance" : info);
}

double CvmTable::cdf(double x) const {
  const double res = resolution();
  if (!(x > 0.0)) return 0.0;
  if (x <= quantiles_.front()) return res * (x / quantiles_.front());
  if (x >= quantiles_.back()) return 1.0 - res;
  const auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), x);
  const auto idx = std::size_t(it - quantiles_.begin());  // x in (q[idx-1], q[idx]]
  const double lo = quantiles_[idx - 1], hi = quantiles_[idx];
  const double frac = hi > lo ? (x - lo) / (hi - lo) : 1.0;
  return res * (double(idx) + frac);
}

double CvmTable::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw domain_error("cvm table: quantile level must lie in (0,1)");
  const double res = resolution();
  const double pos = u / res - 1.0;
  if (pos <= 0.0) return quantiles_.front() * (u / res);
  if (pos >= double(quantiles_.size() - 1)) return quantiles_.back();
  const auto lo = std::size_t(pos);
  const double frac = pos - double(lo);
  return quantiles_[lo] + frac * (quantiles_[lo + 1] - quantiles_[lo]);
}

double cvm_limit_cdf(double x) {
  const CvmTable& table = CvmTable::instance();
  if (x > 0.0 && x >= table.quantile(1.0 - table.resolution()))
    return std::max(cvm_limit_cdf_series(x), 1.0 - table.resolution());
  return table.cdf(x);
}

double lambda_for_inference(const SamplePath& path, int lag_multiple, double p,
                            InferenceMode mode) {
  if (mode == InferenceMode::semimartingale) return semimartingale_lambda(p);
  const double nu = cof_estimate_nu(path, lag_multiple);
  if (!(nu > 0.5 && nu < 1.0)) {
    std::ostringstream os;
    os << "inference: change-of-frequency estimate nu^ = " << nu
       << " lies outside (1/2, 1); the plug-in CLT constant is defined only in the rough "
          "regime.  For martingale-like data use semimartingale mode; otherwise reconsider "
          "the lag or the model.";
    throw regime_error(os.str());
  }
  const double clamped = std::clamp(nu, 0.51, 0.99);
  if (clamped != nu)
    std::clog << "note: nu^ = " << nu << " clamped to " << clamped
              << " before evaluating the variance series\n";
  return lambda_p(clamped, p);
}

double empirical_ks_distance(std::vector<double> sample,
                             const std::function<double(double)>& cdf) {
  if (sample.empty()) throw input_error("ks distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return d;
}

}  // namespace relvar
