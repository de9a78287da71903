#include "relvar/kernels.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "relvar/numeric.h"

namespace relvar {

void GammaKernelParams::validate() const {
  if (!std::isfinite(c) || !std::isfinite(nu) || !std::isfinite(lambda))
    throw domain_error("gamma kernel: parameters must be finite");
  if (!(c > 0.0)) throw domain_error("gamma kernel: c must be positive");
  if (!(lambda > 0.0)) throw domain_error("gamma kernel: lambda must be positive");
  if (!(nu > 0.5)) throw domain_error("gamma kernel: nu must exceed 1/2");
}

void DriftKernelParams::validate() const {
  if (!std::isfinite(c_prime) || !std::isfinite(eta) || !std::isfinite(rho))
    throw domain_error("drift kernel: parameters must be finite");
  if (!(c_prime > 0.0 && eta > 0.0 && rho > 0.0))
    throw domain_error("drift kernel: c', eta, rho must all be positive");
}

void LambdaSeriesConfig::validate() const {
  if (hermite_order_cap < 2 || hermite_order_cap > 150)
    throw domain_error("lambda series: hermite_order_cap must lie in [2, 150]");
  if (correlation_tail_cap < 1) throw domain_error("lambda series: correlation_tail_cap must be >= 1");
  if (!(tail_tolerance > 0.0)) throw domain_error("lambda series: tail_tolerance must be positive");
}

double gamma_kernel_eval(double t, const GammaKernelParams& params) {
  params.validate();
  if (!(t > 0.0) || !std::isfinite(t))
    throw domain_error("gamma_kernel_eval: kernel is defined on (0, inf)");
  return params.c * std::pow(t, params.nu - 1.0) * std::exp(-params.lambda * t);
}

double core_covariance(double t, const GammaKernelParams& params) {
  params.validate();
  if (!(t >= 0.0) || !std::isfinite(t))
    throw domain_error("core_covariance: t must be finite and nonnegative");

  const double nu = params.nu, lam = params.lambda, c2 = params.c * params.c;
  if (nu == 1.0) return c2 * std::exp(-lam * t) / (2.0 * lam);

  // R(t) = c^2 e^{-lam t} * int_0^inf u^{nu-1} (u+t)^{nu-1} e^{-2 lam u} du
  auto base = [&](double u) {
    return std::pow(u, nu - 1.0) * std::pow(u + t, nu - 1.0) * std::exp(-2.0 * lam * u);
  };
  const double split = std::min(1.0, 1.0 / lam);
  double integral;
  if (nu < 1.0) {
    // u = w^{1/q}, q = 2nu-1, removes the u^{nu-1} blow-up at zero
    const double q = 2.0 * nu - 1.0;
    auto desing = [&](double w) {
      const double u = std::pow(w, 1.0 / q);
      return base(u) * u / (q * w);
    };
    integral = integrate(desing, 0.0, std::pow(split, q), 1e-13);
  } else {
    integral = integrate(base, 0.0, split, 1e-13);
  }
  integral += integrate(base, split, split + 45.0 / lam, 1e-13, 1e-300);
  return c2 * std::exp(-lam * t) * integral;
}

double c_delta(double delta, const GammaKernelParams& params) {
  params.validate();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw domain_error("c_delta: delta must be positive");
  const double v = 2.0 * (core_covariance(0.0, params) - core_covariance(delta, params));
  return std::sqrt(std::max(v, 0.0));
}

double abs_moment(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw domain_error("abs_moment: p must be positive");
  return std::exp2(0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(M_PI);
}

double fgn_correlation(long j, double nu) {
  if (j < 1) throw domain_error("fgn_correlation: j must be >= 1");
  if (!(nu > 0.5 && nu < 1.0))
    throw domain_error("fgn_correlation: nu must lie in (1/2, 1)");
  const double q = 2.0 * nu - 1.0;
  // 0.5 j^q ((1+1/j)^q - 2 + (1-1/j)^q); expm1 keeps the cancellation mild at
  // large j, and at j = 1 the second expm1 hits -1 exactly (0^q = 0 convention).
  const double x = 1.0 / double(j);
  const double t1 = std::expm1(q * std::log1p(x));
  const double t2 = std::expm1(q * std::log1p(-x));
  return 0.5 * std::pow(double(j), q) * (t1 + t2);
}

std::vector<std::pair<int, double>> hermite_coefficients(double p, const LambdaSeriesConfig& cfg,
                                                         int gh_degree) {
  if (!(p > 0.0) || !std::isfinite(p)) throw domain_error("hermite_coefficients: p must be positive");
  cfg.validate();
  const int L = cfg.hermite_order_cap;
  gh_degree = std::max(gh_degree, 2 * L + 20);

  const GaussHermite rule = gauss_hermite(gh_degree);
  const double mp = abs_moment(p);
  std::vector<double> raw(std::size_t(L) + 1, 0.0);  // E[(|Z|^p - m_p) He_l(Z)]
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    const double wf = rule.weights[i] * (std::pow(std::abs(x), p) - mp);
    double h_prev = 1.0, h = x;  // He_0, He_1
    for (int l = 2; l <= L; ++l) {
      const double h_next = x * h - double(l - 1) * h_prev;
      h_prev = h;
      h = h_next;
      raw[std::size_t(l)] += wf * h;
    }
  }

  std::vector<std::pair<int, double>> coeffs;
  coeffs.reserve(std::size_t(L) - 1);
  double factorial = 2.0;  // 2!
  for (int l = 2; l <= L; ++l) {
    coeffs.emplace_back(l, l % 2 ? 0.0 : raw[std::size_t(l)] / factorial);
    factorial *= double(l + 1);
  }
  return coeffs;
}

double lambda_p(double nu, double p, const LambdaSeriesConfig& cfg) {
  if (!(nu > 0.5 && nu < 1.0)) throw domain_error("lambda_p: nu must lie in (1/2, 1)");
  if (!(p > 0.0) || !std::isfinite(p)) throw domain_error("lambda_p: p must be positive");
  cfg.validate();

  const auto coeffs = hermite_coefficients(p, cfg);
  const int L = cfg.hermite_order_cap;
  const long J = cfg.correlation_tail_cap;

  // S[l] = sum_{j<=J} rho_nu(j)^l, even l only
  std::vector<long double> S(std::size_t(L) + 1, 0.0L);
  for (long j = 1; j <= J; ++j) {
    const double rho = fgn_correlation(j, nu);
    const double r2 = rho * rho;
    double rl = r2;
    for (int l = 2; l <= L; l += 2) {
      S[std::size_t(l)] += rl;
      rl *= r2;
    }
  }
  // fill the lag tail of the l = 2 term from the asymptotic correlation
  const double H = nu - 0.5;
  const double kappa = std::abs(H * (2.0 * H - 1.0));
  const double lag_tail = kappa * kappa * std::pow(double(J), 4.0 * H - 3.0) / (3.0 - 4.0 * H);
  S[2] += lag_tail;

  const double rho_J = std::abs(fgn_correlation(J, nu));
  const double var_p = abs_moment(2.0 * p) - abs_moment(p) * abs_moment(p);

  long double lambda = 0.0L;
  double parseval = 0.0;
  double lag_tail_bound = 2.0 * lag_tail;  // estimate uncertainty of the l = 2 fill-in
  double factorial = 2.0;
  for (const auto& [l, a_l] : coeffs) {
    if (a_l != 0.0) {
      const double w = factorial * a_l * a_l;
      parseval += w;
      lambda += (long double)w * (1.0L + 2.0L * S[std::size_t(l)]);
      if (l >= 4) lag_tail_bound += w * 2.0 * std::pow(rho_J, l - 2) * lag_tail;
    }
    factorial *= double(l + 1);
  }

  // neglected Hermite orders: each term's correlation factor is bounded by the
  // l = 2 factor since |rho|^l <= rho^2
  const double order_tail_bound = std::max(0.0, var_p - parseval) * (1.0 + 2.0 * double(S[2]));
  const double tail_bound = order_tail_bound + lag_tail_bound;
  if (tail_bound > cfg.tail_tolerance)
    throw truncation_error("lambda_p: truncation tail bound " + std::to_string(tail_bound) +
                           " exceeds tolerance " + std::to_string(cfg.tail_tolerance) +
                           "; raise the series caps");
  return double(lambda);
}

double semimartingale_lambda(double p) { return abs_moment(2.0 * p) - std::pow(abs_moment(p), 2); }

double kernel_tail_mass(const GammaKernelParams& params, double horizon) {
  params.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw domain_error("kernel_tail_mass: horizon must be positive");
  const double total = core_covariance(0.0, params);
  auto g2 = [&](double u) {
    const double g = gamma_kernel_eval(u, params);
    return g * g;
  };
  const double upper = horizon + 45.0 / params.lambda;
  return integrate(g2, horizon, upper, 1e-10, total * 1e-16) / total;
}

}  // namespace relvar
