#pragma once

#include <utility>
#include <vector>

#include "relvar/errors.h"

namespace relvar {

enum class KernelRegime { semimartingale, rough, smooth, differentiable };

// Gamma kernel g(t) = c * t^(nu-1) * exp(-lambda*t) on (0, inf).
// nu controls path roughness (Holder order nu - 1/2 for nu in (1/2,1)); nu = 1
// is the semimartingale (OU) case.  Square-integrability near zero needs
// nu > 1/2.
struct GammaKernelParams {
  double c = 1.0;
  double nu = 5.0 / 6.0;
  double lambda = 1.0;

  KernelRegime regime() const {
    if (nu == 1.0) return KernelRegime::semimartingale;
    if (nu < 1.0) return KernelRegime::rough;
    if (nu <= 1.5) return KernelRegime::smooth;
    return KernelRegime::differentiable;
  }
  void validate() const;
};

// Drift convolution kernel q(t) = c' * t^(eta-1) * exp(-rho*t).
struct DriftKernelParams {
  double c_prime = 1.0;
  double eta = 1.0;
  double rho = 1.0;

  void validate() const;
};

// Truncation controls for the Hermite/correlation double series behind
// lambda_p.  The caps carry documented tail bounds; if the bound exceeds
// tail_tolerance the evaluation refuses rather than silently truncating.
struct LambdaSeriesConfig {
  int hermite_order_cap = 20;           // highest Hermite index L
  long correlation_tail_cap = 100000;   // highest correlation lag J
  double tail_tolerance = 1e-2;         // absolute bound on the neglected mass

  void validate() const;
};

// g(t); domain (0, inf).
double gamma_kernel_eval(double t, const GammaKernelParams& params);

// Stationary covariance of the Gaussian core, R(t) = int_0^inf g(u)g(u+t) du.
// Analytic for nu = 1 (OU); adaptive quadrature otherwise, with the square
// integrable singularity at zero removed by the substitution u = w^(1/(2nu-1)).
// R(0) = c^2 * Gamma(2nu-1) / (2 lambda)^(2nu-1).
double core_covariance(double t, const GammaKernelParams& params);

// Standard deviation of a lag-delta core increment:
// c(delta) = sqrt(2 (R(0) - R(delta))).  Behaves like delta^(nu-1/2) (up to a
// slowly varying factor) as delta -> 0.
double c_delta(double delta, const GammaKernelParams& params);

// Absolute moment of the standard normal, m_p = E|Z|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi).
double abs_moment(double p);

// Correlation of fractional Gaussian noise with Hurst index nu - 1/2:
// rho_nu(j) = ((j+1)^(2nu-1) - 2 j^(2nu-1) + (j-1)^(2nu-1)) / 2, using the
// convention 0^(2nu-1) = 0 at j = 1.  Defined for nu in (1/2, 1), where the
// central-limit constant needs it.  |rho_nu(j)| <= kFgnBoundConstant * j^(2nu-3)
// for j >= 2, uniformly over that range.
double fgn_correlation(long j, double nu);

inline constexpr double kFgnBoundConstant = 2.5;

// Hermite coefficients of x -> |x|^p - m_p in probabilists' polynomials:
// a_l = E[(|Z|^p - m_p) He_l(Z)] / l!, returned for l = 2..L.  Odd orders are
// exactly zero by symmetry.  Computed by Gauss-Hermite quadrature (degree
// >= 200): polynomially exact for even integer p; for odd/non-integer p the
// kink of |x|^p at zero limits accuracy to about 1e-3 at degree 200 (raise
// gh_degree if that matters).
std::vector<std::pair<int, double>> hermite_coefficients(double p, const LambdaSeriesConfig& cfg,
                                                         int gh_degree = 200);

// CLT variance constant for rough-kernel power variation,
//   lambda_p(nu) = sum_{l>=2} l! a_l^2 (1 + 2 sum_{j>=1} rho_nu(j)^l),
// truncated at the configured caps; the lag tail of the l = 2 term is filled
// in from the asymptotic rho_nu(j) ~ H(2H-1) j^(2H-2), H = nu - 1/2, and the
// remaining neglected mass is bounded and checked against tail_tolerance.
// Exceeds m_{2p} - m_p^2 strictly on nu in (1/2,1) and tends to it as
// nu -> 1.  Values very close to nu = 1/2 inherit the slow decay of
// rho_nu(1) -> -1/2; the series still converges but the lag cap dominates
// the error budget there.
double lambda_p(double nu, double p, const LambdaSeriesConfig& cfg = {});

// Semimartingale CLT constant m_{2p} - m_p^2.
double semimartingale_lambda(double p);

// Fraction of the kernel's squared mass beyond a horizon:
// int_horizon^inf g^2 / int_0^inf g^2.  Used to police simulation truncation.
double kernel_tail_mass(const GammaKernelParams& params, double horizon);

}  // namespace relvar
