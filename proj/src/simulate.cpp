#include "relvar/simulate.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "relvar/errors.h"
#include "relvar/numeric.h"

namespace relvar {
namespace {

constexpr double kDefaultEfolds = 20.0;
// direct-route cost cap: n_out * M multiply-adds
constexpr Eigen::Index kDirectCostCap = Eigen::Index(1) << 25;

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void SamplePath::validate() const {
  if (values.size() < 2) throw input_error("sample path: need at least 2 observations");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw input_error("sample path: spacing must be positive and finite");
  if (!std::isfinite(t0)) throw input_error("sample path: start time must be finite");
  if (!values.allFinite()) throw input_error("sample path: non-finite observation");
}

// --- volatility -------------------------------------------------------------

VolatilityModel VolatilityModel::constant_vol(double lvl) {
  VolatilityModel v;
  v.kind = Kind::constant;
  v.level = lvl;
  v.validate();
  return v;
}

VolatilityModel VolatilityModel::piecewise_vol(std::vector<double> bps, std::vector<double> lvls) {
  VolatilityModel v;
  v.kind = Kind::piecewise;
  v.breakpoints = std::move(bps);
  v.levels = std::move(lvls);
  v.validate();
  return v;
}

VolatilityModel VolatilityModel::sinusoidal_vol(double base, double amplitude, double period) {
  VolatilityModel v;
  v.kind = Kind::sinusoidal;
  v.base = base;
  v.amplitude = amplitude;
  v.period = period;
  v.validate();
  return v;
}

VolatilityModel VolatilityModel::exp_ou_vol(double mean, double reversion, double volvol) {
  VolatilityModel v;
  v.kind = Kind::exp_ou;
  v.ou_mean = mean;
  v.ou_reversion = reversion;
  v.ou_volvol = volvol;
  v.validate();
  return v;
}

void VolatilityModel::validate() const {
  switch (kind) {
    case Kind::constant:
      if (!(level >= 0.0) || !std::isfinite(level))
        throw config_error("volatility: constant level must be >= 0");
      break;
    case Kind::piecewise: {
      if (levels.size() != breakpoints.size() + 1)
        throw config_error("volatility: piecewise needs one more level than breakpoints");
      for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!std::isfinite(breakpoints[i]) || (i > 0 && breakpoints[i] <= breakpoints[i - 1]))
          throw config_error("volatility: breakpoints must be finite and strictly ascending");
      }
      for (double l : levels)
        if (!(l >= 0.0) || !std::isfinite(l)) throw config_error("volatility: levels must be >= 0");
      break;
    }
    case Kind::sinusoidal:
      if (!(base > 0.0) || !(period > 0.0) || std::abs(amplitude) > base)
        throw config_error("volatility: sinusoidal needs base > 0, period > 0, |amplitude| <= base");
      break;
    case Kind::exp_ou:
      if (!(ou_reversion > 0.0) || !(ou_volvol >= 0.0) || !std::isfinite(ou_mean))
        throw config_error("volatility: exp-OU needs reversion > 0, volvol >= 0");
      break;
  }
}

double VolatilityModel::value(double t) const {
  switch (kind) {
    case Kind::constant:
      return level;
    case Kind::piecewise: {
      auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
      return levels[static_cast<std::size_t>(it - breakpoints.begin())];
    }
    case Kind::sinusoidal:
      return base + amplitude * std::sin(2.0 * M_PI * t / period);
    case Kind::exp_ou:
      throw domain_error("volatility: exp-OU has no deterministic value; simulate a path");
  }
  throw domain_error("volatility: unknown kind");
}

std::string VolatilityModel::describe() const {
  switch (kind) {
    case Kind::constant:
      return "constant(" + fmt(level) + ")";
    case Kind::piecewise:
      return "piecewise(" + std::to_string(levels.size()) + " levels)";
    case Kind::sinusoidal:
      return "sinusoidal(base=" + fmt(base) + ",amp=" + fmt(amplitude) + ",period=" + fmt(period) + ")";
    case Kind::exp_ou:
      return "exp_ou(mean=" + fmt(ou_mean) + ",rev=" + fmt(ou_reversion) + ",volvol=" + fmt(ou_volvol) + ")";
  }
  return "?";
}

double integrated_power(const VolatilityModel& vol, double p, double t) {
  vol.validate();
  if (!(p > 0.0)) throw domain_error("integrated power: order must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("integrated power: time must be >= 0");
  switch (vol.kind) {
    case VolatilityModel::Kind::constant:
      return std::pow(vol.level, p) * t;
    case VolatilityModel::Kind::piecewise: {
      double acc = 0.0;
      for (std::size_t i = 0; i < vol.levels.size(); ++i) {
        const double lo = (i == 0) ? 0.0 : std::max(vol.breakpoints[i - 1], 0.0);
        const double hi = (i == vol.breakpoints.size()) ? t : std::min(vol.breakpoints[i], t);
        if (hi > lo) acc += std::pow(vol.levels[i], p) * (hi - lo);
      }
      return acc;
    }
    case VolatilityModel::Kind::sinusoidal: {
      const double b = vol.base, a = vol.amplitude, w = 2.0 * M_PI / vol.period;
      if (p == 2.0) {
        // int (b + a sin ws)^2 = b^2 t + 2ab(1-cos wt)/w + a^2 (t/2 - sin(2wt)/(4w))
        return b * b * t + 2.0 * a * b * (1.0 - std::cos(w * t)) / w +
               a * a * (0.5 * t - std::sin(2.0 * w * t) / (4.0 * w));
      }
      if (t == 0.0) return 0.0;
      return integrate([&](double s) { return std::pow(b + a * std::sin(w * s), p); }, 0.0, t,
                       1e-12);
    }
    case VolatilityModel::Kind::exp_ou:
      throw domain_error("integrated power: exp-OU needs a realised path; use the path overload");
  }
  throw domain_error("integrated power: unknown volatility kind");
}

double integrated_power(const SamplePath& sigma_path, double p, double t) {
  sigma_path.validate();
  if (!(p > 0.0)) throw domain_error("integrated power: order must be positive");
  const double h = sigma_path.delta;
  const double rel_t = t - sigma_path.t0;
  if (!(rel_t >= -1e-12) || rel_t > (double(sigma_path.n_obs() - 1) + 1e-9) * h)
    throw domain_error("integrated power: time outside the volatility path");
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < sigma_path.n_obs(); ++k) {
    double cell = std::min(rel_t, double(k + 1) * h) - double(k) * h;
    if (cell <= 0.0) break;
    acc += std::pow(std::abs(sigma_path.values[k]), p) * cell;
  }
  return acc;
}

// --- drift ------------------------------------------------------------------

DriftModel DriftModel::none_drift() { return DriftModel{}; }

DriftModel DriftModel::abs_cont_drift(double mu, Rate rate, double rate_level) {
  DriftModel d;
  d.kind = Kind::abs_cont;
  d.mu = mu;
  d.rate = rate;
  d.rate_level = rate_level;
  d.validate();
  return d;
}

DriftModel DriftModel::gamma_conv_drift(double mu, DriftKernelParams q, Rate rate,
                                        double rate_level) {
  DriftModel d;
  d.kind = Kind::gamma_conv;
  d.mu = mu;
  d.rate = rate;
  d.rate_level = rate_level;
  d.kernel = q;
  d.validate();
  return d;
}

void DriftModel::validate() const {
  if (!std::isfinite(mu)) throw config_error("drift: level offset must be finite");
  if (rate == Rate::constant && !std::isfinite(rate_level))
    throw config_error("drift: constant rate must be finite");
  if (kind == Kind::gamma_conv) kernel.validate();
}

double DriftModel::value(double t) const {
  switch (kind) {
    case Kind::none:
      return mu;
    case Kind::abs_cont:
      switch (rate) {
        case Rate::zero:
          return mu;
        case Rate::sin_plus_2:
          // int_0^t (sin s + 2) ds
          return mu + 2.0 * t + (1.0 - std::cos(t));
        case Rate::constant:
          return mu + rate_level * t;
      }
      break;
    case Kind::gamma_conv: {
      // A_t = mu + int_{-inf}^t q(t-s) a_s ds with q(u) = c' u^(eta-1) e^(-rho u).
      // For a = const: const * c' Gamma(eta) / rho^eta.  For a = sin(s)+2 add
      // c' Gamma(eta) Im[ e^{it} (rho + i)^{-eta} ].
      const double mass = kernel.c_prime * std::tgamma(kernel.eta) *
                          std::pow(kernel.rho, -kernel.eta);
      switch (rate) {
        case Rate::zero:
          return mu;
        case Rate::constant:
          return mu + rate_level * mass;
        case Rate::sin_plus_2: {
          const std::complex<double> ri(kernel.rho, 1.0);
          const std::complex<double> osc =
              std::exp(std::complex<double>(0.0, t)) * std::pow(ri, -kernel.eta);
          return mu + 2.0 * mass + kernel.c_prime * std::tgamma(kernel.eta) * osc.imag();
        }
      }
      break;
    }
  }
  throw domain_error("drift: unknown kind");
}

std::string DriftModel::describe() const {
  auto rate_name = [&] {
    switch (rate) {
      case Rate::zero: return std::string("zero");
      case Rate::sin_plus_2: return std::string("sin+2");
      case Rate::constant: return std::string("const(" + fmt(rate_level) + ")");
    }
    return std::string("?");
  };
  switch (kind) {
    case Kind::none:
      return mu == 0.0 ? "none" : "level(" + fmt(mu) + ")";
    case Kind::abs_cont:
      return "abs_cont(mu=" + fmt(mu) + ",rate=" + rate_name() + ")";
    case Kind::gamma_conv:
      return "gamma_conv(mu=" + fmt(mu) + ",eta=" + fmt(kernel.eta) + ",rho=" + fmt(kernel.rho) +
             ",rate=" + rate_name() + ")";
  }
  return "?";
}

// --- configuration ----------------------------------------------------------

Eigen::Index SimConfig::n_out() const {
  return static_cast<Eigen::Index>(std::floor(horizon / delta_out + 1e-9)) + 1;
}

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw config_error("sim: horizon must be > 0");
  if (!(delta_out > 0.0) || !std::isfinite(delta_out))
    throw config_error("sim: output spacing must be > 0");
  if (n_out() < 2) throw config_error("sim: horizon shorter than one output step");
  if (refine < 1) throw config_error("sim: refinement factor must be >= 1");
  if (!(truncation >= 0.0) || !std::isfinite(truncation))
    throw config_error("sim: truncation horizon must be >= 0 (0 = automatic)");
}

// --- exact Gaussian core ----------------------------------------------------

GaussianCoreSampler::GaussianCoreSampler(const GammaKernelParams& params, Eigen::Index n,
                                         double delta)
    : params_(params), delta_(delta) {
  params.validate();
  if (n < 2) throw config_error("core sampler: need at least 2 grid points");
  if (n > kMaxExactCoreSize)
    throw config_error("core sampler: exact factorization capped at n = " +
                       std::to_string(kMaxExactCoreSize));
  if (!(delta > 0.0)) throw config_error("core sampler: spacing must be > 0");

  Eigen::VectorXd acf(n);
  for (Eigen::Index k = 0; k < n; ++k) acf[k] = core_covariance(double(k) * delta, params);

  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = acf[i - j];

  // Toeplitz covariances of long-memory processes sit close to singular;
  // retry with a tiny relative ridge before giving up.
  const double r0 = acf[0];
  for (double scale : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += scale * r0;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = scale * r0;
      return;
    }
  }
  throw config_error("core sampler: covariance not factorizable even with 1e-10 relative jitter");
}

SamplePath GaussianCoreSampler::draw(RngStream& rng) const {
  const Eigen::Index n = chol_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_normal();
  SamplePath path;
  path.t0 = 0.0;
  path.delta = delta_;
  path.values = (chol_ * z).array();
  path.meta = "gaussian-core c=" + fmt(params_.c) + " nu=" + fmt(params_.nu) +
              " lambda=" + fmt(params_.lambda) + " delta=" + fmt(delta_) +
              (jitter_ > 0.0 ? " jitter=" + fmt(jitter_) : "");
  return path;
}

SamplePath simulate_gaussian_core(const SimConfig& cfg, const GammaKernelParams& params) {
  cfg.validate();
  GaussianCoreSampler sampler(params, cfg.n_out(), cfg.delta_out);
  RngStream rng = path_stream(cfg.seed, cfg.replicate, 0);
  SamplePath path = sampler.draw(rng);
  path.meta += " seed=" + std::to_string(cfg.seed) + " rep=" + std::to_string(cfg.replicate);
  return path;
}

// --- truncated moving-average scheme -----------------------------------------

BssSampler::BssSampler(const SimConfig& cfg, const GammaKernelParams& params,
                       const VolatilityModel& vol, const DriftModel& drift, ConvRoute route)
    : cfg_(cfg), params_(params), vol_(vol), drift_(drift) {
  cfg.validate();
  params.validate();
  vol.validate();
  drift.validate();

  const Eigen::Index n_out = cfg.n_out();
  h_ = cfg.delta_out / double(cfg.refine);
  n_in_ = (n_out - 1) * static_cast<Eigen::Index>(cfg.refine);

  const double trunc_time = cfg.truncation > 0.0 ? cfg.truncation : kDefaultEfolds / params.lambda;
  m_cells_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(trunc_time / h_ - 1e-9)));
  tail_mass_ = kernel_tail_mass(params, double(m_cells_) * h_);
  if (tail_mass_ > kSimTailTolerance)
    throw config_error("bss: truncated kernel drops squared mass " + fmt(tail_mass_) +
                       " > " + fmt(kSimTailTolerance) + "; raise the truncation horizon");

  // Per-cell evaluation points b_m chosen so that g(b_m)^2 h reproduces the
  // exact cell mass of the power factor t^(2nu-2); the exponential factor is
  // smooth at scale 1/lambda >> h.  Reduces to midpoints at nu = 1.
  weights_.resize(m_cells_);
  const double q = 2.0 * params.nu - 1.0;
  for (Eigen::Index m = 1; m <= m_cells_; ++m) {
    double b;
    if (params.nu == 1.0) {
      b = (double(m) - 0.5) * h_;
    } else {
      // (m^q - (m-1)^q)/q, written to survive m ~ 1e7 without cancellation
      double cell = -std::expm1(q * std::log1p(-1.0 / double(m))) * std::pow(double(m), q) / q;
      b = h_ * std::pow(cell, 1.0 / (2.0 * params.nu - 2.0));
    }
    weights_[m - 1] = gamma_kernel_eval(b, params_);
  }

  if (vol_.deterministic()) {
    sigma_grid_.resize(m_cells_ + n_in_);
    for (Eigen::Index k = 0; k < sigma_grid_.size(); ++k)
      sigma_grid_[k] = vol_.value(double(k - m_cells_) * h_);
  }

  drift_grid_.resize(n_out);
  for (Eigen::Index j = 0; j < n_out; ++j) drift_grid_[j] = drift_.value(double(j) * cfg.delta_out);

  switch (route) {
    case ConvRoute::direct:
      use_fft_ = false;
      break;
    case ConvRoute::fft:
      use_fft_ = true;
      break;
    case ConvRoute::automatic:
      use_fft_ = n_out * m_cells_ > kDirectCostCap;
      break;
  }
  if (use_fft_) {
    fft_len_ = next_pow2(2 * m_cells_ + n_in_);
    std::vector<double> ker(static_cast<std::size_t>(fft_len_), 0.0);
    for (Eigen::Index m = 1; m <= m_cells_; ++m) ker[static_cast<std::size_t>(m)] = weights_[m - 1];
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(kernel_spec_, ker);
  }
}

SamplePath BssSampler::draw(RngStream& noise, RngStream& vol_noise, SamplePath* vol_out) const {
  const Eigen::Index n_out = cfg_.n_out();
  const Eigen::Index cells = m_cells_ + n_in_;
  const double sqrt_h = std::sqrt(h_);

  // volatility at inner cell left edges (adapted: sigma enters one step ahead
  // of the increment it multiplies)
  Eigen::ArrayXd sigma;
  Eigen::ArrayXd sigma_at_end;  // sigma(T), only for exp-OU vol_out
  if (vol_.deterministic()) {
    sigma = sigma_grid_;
  } else {
    const double mean = vol_.ou_mean, kappa = vol_.ou_reversion, zeta = vol_.ou_volvol;
    Eigen::ArrayXd logv(cells + 1);
    logv[0] = mean + zeta / std::sqrt(2.0 * kappa) * vol_noise.next_normal();
    const double decay = std::exp(-kappa * h_);
    const double step_sd = zeta * std::sqrt(-std::expm1(-2.0 * kappa * h_) / (2.0 * kappa));
    for (Eigen::Index k = 1; k <= cells; ++k)
      logv[k] = mean + (logv[k - 1] - mean) * decay + step_sd * vol_noise.next_normal();
    sigma = logv.head(cells).exp();
    sigma_at_end.resize(1);
    sigma_at_end[0] = std::exp(logv[cells]);
  }

  const auto fill = [&](double* z) {
    for (Eigen::Index k = 0; k < cells; ++k) z[k] = sigma[k] * sqrt_h * noise.next_normal();
  };

  Eigen::ArrayXd out(n_out);
  if (use_fft_) {
    std::vector<double> buf(static_cast<std::size_t>(fft_len_), 0.0);
    fill(buf.data());
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kernel_spec_[i];
    std::vector<double> conv;
    fft.inv(conv, spec, fft_len_);
    for (Eigen::Index j = 0; j < n_out; ++j)
      out[j] = conv[static_cast<std::size_t>(j * cfg_.refine + m_cells_)];
  } else {
    Eigen::ArrayXd z(cells);
    fill(z.data());
    Eigen::ArrayXd wrev = weights_.reverse();
    for (Eigen::Index j = 0; j < n_out; ++j) {
      // X(j delta) = sum_m g(b_m) Z_{j r - m}; Z buffer index shifted by M
      out[j] = (wrev * z.segment(j * cfg_.refine, m_cells_)).sum();
    }
  }
  out += drift_grid_;

  if (vol_out) {
    vol_out->t0 = 0.0;
    vol_out->delta = cfg_.delta_out;
    vol_out->values.resize(n_out);
    // sigma index k covers time (k - M) h; output time j delta is inner index j r + M
    for (Eigen::Index j = 0; j < n_out; ++j) {
      Eigen::Index k = j * cfg_.refine + m_cells_;
      vol_out->values[j] = (k < cells) ? sigma[k] : sigma_at_end.size() ? sigma_at_end[0]
                                                                        : vol_.value(cfg_.horizon);
    }
    vol_out->meta = "volatility " + vol_.describe();
  }

  SamplePath path;
  path.t0 = 0.0;
  path.delta = cfg_.delta_out;
  path.values = out;
  path.meta = "bss c=" + fmt(params_.c) + " nu=" + fmt(params_.nu) + " lambda=" +
              fmt(params_.lambda) + " vol=" + vol_.describe() + " drift=" + drift_.describe() +
              " refine=" + std::to_string(cfg_.refine) + " cells=" + std::to_string(m_cells_) +
              (use_fft_ ? " route=fft" : " route=direct");
  return path;
}

SamplePath simulate_bss(const SimConfig& cfg, const GammaKernelParams& params,
                        const VolatilityModel& vol, const DriftModel& drift,
                        SamplePath* vol_out) {
  BssSampler sampler(cfg, params, vol, drift);
  RngStream noise = path_stream(cfg.seed, cfg.replicate, 0);
  RngStream vnoise = path_stream(cfg.seed, cfg.replicate, 1);
  SamplePath path = sampler.draw(noise, vnoise, vol_out);
  path.meta += " seed=" + std::to_string(cfg.seed) + " rep=" + std::to_string(cfg.replicate);
  return path;
}

SamplePath simulate_semimartingale(const SimConfig& cfg, const VolatilityModel& vol,
                                   const DriftModel& drift, SamplePath* vol_out) {
  cfg.validate();
  vol.validate();
  drift.validate();

  const Eigen::Index n_out = cfg.n_out();
  const double h = cfg.delta_out / double(cfg.refine);
  const Eigen::Index n_in = (n_out - 1) * static_cast<Eigen::Index>(cfg.refine);
  const double sqrt_h = std::sqrt(h);

  RngStream noise = path_stream(cfg.seed, cfg.replicate, 0);
  RngStream vnoise = path_stream(cfg.seed, cfg.replicate, 1);

  Eigen::ArrayXd sigma(n_in + 1);
  if (vol.deterministic()) {
    for (Eigen::Index k = 0; k <= n_in; ++k) sigma[k] = vol.value(double(k) * h);
  } else {
    const double mean = vol.ou_mean, kappa = vol.ou_reversion, zeta = vol.ou_volvol;
    double logv = mean + zeta / std::sqrt(2.0 * kappa) * vnoise.next_normal();
    const double decay = std::exp(-kappa * h);
    const double step_sd = zeta * std::sqrt(-std::expm1(-2.0 * kappa * h) / (2.0 * kappa));
    sigma[0] = std::exp(logv);
    for (Eigen::Index k = 1; k <= n_in; ++k) {
      logv = mean + (logv - mean) * decay + step_sd * vnoise.next_normal();
      sigma[k] = std::exp(logv);
    }
  }

  // exact N(0, sigma_k^2 h) increments; for constant / grid-aligned piecewise
  // volatility the integral form is exact at any refinement
  double acc = 0.0;
  Eigen::ArrayXd out(n_out);
  out[0] = drift.value(0.0);
  Eigen::Index j = 1;
  for (Eigen::Index k = 0; k < n_in; ++k) {
    acc += sigma[k] * sqrt_h * noise.next_normal();
    if ((k + 1) % cfg.refine == 0) {
      out[j] = drift.value(double(j) * cfg.delta_out) + acc;
      ++j;
    }
  }

  if (vol_out) {
    vol_out->t0 = 0.0;
    vol_out->delta = cfg.delta_out;
    vol_out->values.resize(n_out);
    for (Eigen::Index i = 0; i < n_out; ++i)
      vol_out->values[i] = sigma[i * static_cast<Eigen::Index>(cfg.refine)];
    vol_out->meta = "volatility " + vol.describe();
  }

  SamplePath path;
  path.t0 = 0.0;
  path.delta = cfg.delta_out;
  path.values = out;
  path.meta = "semimartingale vol=" + vol.describe() + " drift=" + drift.describe() +
              " refine=" + std::to_string(cfg.refine) + " seed=" + std::to_string(cfg.seed) +
              " rep=" + std::to_string(cfg.replicate);
  return path;
}

// --- drift negligibility -----------------------------------------------------

NegligibilityResult check_drift_negligibility(double nu, double p, const DriftModel& drift,
                                              LimitKind regime) {
  if (!(nu > 0.5)) throw domain_error("drift negligibility: nu must exceed 1/2");
  if (!(p > 0.0)) throw domain_error("drift negligibility: order must be positive");
  drift.validate();

  std::ostringstream why;
  NegligibilityResult res;
  switch (drift.kind) {
    case DriftModel::Kind::none:
      res.negligible = true;
      why << "no drift term";
      break;
    case DriftModel::Kind::abs_cont: {
      if (drift.rate == DriftModel::Rate::zero ||
          (drift.rate == DriftModel::Rate::constant && drift.rate_level == 0.0)) {
        res.negligible = true;
        why << "constant level only; increments see no drift";
        break;
      }
      if (p < 1.0)
        throw domain_error("drift negligibility: absolutely continuous criterion needs p >= 1");
      // |A_{t+d} - A_t| = O(d) against c(d) ~ d^(nu-1/2): the drift enters the
      // p-variation at rate d^(3/2-nu) (consistency) and picks up another
      // d^(-1/(2p)) from the CLT normalisation.
      const double cutoff = regime == LimitKind::consistency ? 1.5 : 1.5 - 0.5 / p;
      res.negligible = nu < cutoff;
      why << "Lipschitz drift: nu = " << nu << (res.negligible ? " < " : " >= ") << cutoff
          << (regime == LimitKind::consistency ? " (consistency cutoff 3/2)"
                                               : " (clt cutoff 3/2 - 1/(2p))");
      break;
    }
    case DriftModel::Kind::gamma_conv: {
      if (drift.rate == DriftModel::Rate::zero ||
          (drift.rate == DriftModel::Rate::constant && drift.rate_level == 0.0)) {
        res.negligible = true;
        why << "constant level only; increments see no drift";
        break;
      }
      // increments of the gamma-convolution drift scale like d^min(eta,1) (up
      // to logs at eta = 1); compare against d^(nu-1/2) and the CLT penalty
      const double smooth = std::min(drift.kernel.eta, 1.0);
      const double cutoff =
          regime == LimitKind::consistency ? nu - 0.5 : nu - (p - 1.0) / (2.0 * p);
      res.negligible = smooth > cutoff;
      why << "gamma-convolution drift: min(eta,1) = " << smooth
          << (res.negligible ? " > " : " <= ") << cutoff
          << (regime == LimitKind::consistency ? " = nu - 1/2" : " = nu - (p-1)/(2p)");
      break;
    }
  }
  res.explanation = why.str();
  return res;
}

}  // namespace relvar
