#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

// Frozen reference values, computed to 50 digits with an independent
// extended-precision tool before the library code existed.  Tests compare
// against these; nothing below is produced by the code under test.
namespace frozen {

// gamma-kernel covariance, c = 1, lambda = 1
inline constexpr double kR0Nu56 = 0.8530408479617963;        // Gamma(2/3)/2^(2/3)
inline constexpr double kRHalfNu56 = 0.39678966096182626;    // R(0.5), nu = 5/6
inline constexpr double kR03Ou = 0.37040911034085893;        // e^{-0.3}/2
inline constexpr double kCdelta01Ou = 0.30848433017584609;   // sqrt(1 - e^{-0.1})
inline constexpr double kTwoOverE = 0.7357588823428846;

// absolute normal moments
inline constexpr double kM1 = 0.7978845608028654;
inline constexpr double kM3 = 1.5957691216057307;
inline constexpr double kM5 = 6.383076486422923;

// fGn correlations
inline constexpr double kRho1Nu56 = -0.20629947401590026;    // (2^(2/3) - 2)/2
inline constexpr double kRho10Nu09 = -0.005058813643137716;

// lambda_2 series (J = 1e7 plus integral tail)
inline constexpr double kLambda2Nu56 = 2.1856983736433531;
inline constexpr double kLambda2Nu07 = 2.4741976651419275;
inline constexpr double kLambda2Nu051 = 2.9723172055567675;

// Hermite coefficients of |x|, closed forms m1/2 and -m1/24
inline constexpr double kA2P1 = 0.39894228040143268;
inline constexpr double kA4P1 = -0.03324519003345272;
inline constexpr double kVarAbsP1 = 0.36338022763241866;     // 1 - 2/pi

// Kolmogorov limit quantiles (series + bisection)
inline constexpr double kKsQ90 = 1.2238478702170824;
inline constexpr double kKsQ95 = 1.3580986393225506;
inline constexpr double kKsQ99 = 1.6276236115189503;
inline constexpr double kKsQ50 = 0.8275735551899077;

// integrated squared Brownian bridge quantiles (Bessel series + bisection)
inline constexpr double kCvmQ50 = 0.118879550980348;
inline constexpr double kCvmQ90 = 0.347304920191632;
inline constexpr double kCvmQ95 = 0.461361293605876;
inline constexpr double kCvmQ99 = 0.743459313755768;

inline constexpr double kZ975 = 1.9599639845400542;
inline constexpr double kIntCosSq = 0.7273243567064204;      // int_0^1 cos^2

}  // namespace frozen

namespace testutil {

struct Moments {
  double mean = 0.0;
  double var = 0.0;   // unbiased
  double se = 0.0;    // standard error of the mean
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = double(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= (n - 1.0);
  m.se = std::sqrt(m.var / n);
  return m;
}

inline double median(std::vector<double> xs) {
  const std::size_t n = xs.size();
  std::sort(xs.begin(), xs.end());
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// two-sample Kolmogorov-Smirnov distance
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

}  // namespace testutil
