#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relvar/kernels.h"
#include "relvar/rng.h"

namespace relvar {

// Uniformly spaced observations on [t0, t0 + (n-1)*delta].
struct SamplePath {
  double t0 = 0.0;
  double delta = 0.0;
  Eigen::ArrayXd values;
  std::string meta;  // provenance: model, params, seed

  Eigen::Index n_obs() const { return values.size(); }
  double horizon() const { return t0 + delta * double(values.size() - 1); }
  void validate() const;
};

// Volatility (intermittency) process sigma.  The first three variants are
// deterministic and admit exact integrated power functionals; exp-OU is a
// positive stochastic volatility driven by noise independent of the price
// driver, adapted in the required sense.
struct VolatilityModel {
  enum class Kind { constant, piecewise, sinusoidal, exp_ou };

  Kind kind = Kind::constant;
  double level = 1.0;                         // constant
  std::vector<double> breakpoints;            // piecewise: ascending interior times
  std::vector<double> levels;                 // piecewise: breakpoints.size() + 1 entries
  double base = 1.0, amplitude = 0.0, period = 1.0;  // base + amplitude*sin(2 pi t/period)
  double ou_mean = 0.0, ou_reversion = 1.0, ou_volvol = 0.5;  // log-vol OU parameters

  static VolatilityModel constant_vol(double lvl);
  static VolatilityModel piecewise_vol(std::vector<double> bps, std::vector<double> lvls);
  static VolatilityModel sinusoidal_vol(double base, double amplitude, double period);
  static VolatilityModel exp_ou_vol(double mean, double reversion, double volvol);

  bool deterministic() const { return kind != Kind::exp_ou; }
  double value(double t) const;  // deterministic variants only
  void validate() const;
  std::string describe() const;
};

// sigma^{p+}(t) = int_0^t sigma_s^p ds, closed form for constant/piecewise and
// for sinusoidal at p = 2; other sinusoidal powers use adaptive quadrature at
// 1e-12.  The exp-OU variant has no deterministic answer -- use the path
// overload on a realised volatility path.
double integrated_power(const VolatilityModel& vol, double p, double t);
double integrated_power(const SamplePath& sigma_path, double p, double t);

// Drift term A.  abs_cont: A_t = mu + int_0^t a_s ds.  gamma_conv:
// A_t = mu + int_{-inf}^t q(t-s) a_s ds with q the (c', eta, rho) gamma
// kernel.  The rate a is deterministic and bounded (default sin(s) + 2), so
// A is evaluated in closed form and coupled drift/no-drift experiments are
// exact.
struct DriftModel {
  enum class Kind { none, abs_cont, gamma_conv };
  enum class Rate { zero, sin_plus_2, constant };

  Kind kind = Kind::none;
  double mu = 0.0;  // constant level offset
  Rate rate = Rate::sin_plus_2;
  double rate_level = 0.0;  // Rate::constant
  DriftKernelParams kernel;  // gamma_conv only

  static DriftModel none_drift();
  static DriftModel abs_cont_drift(double mu, Rate rate = Rate::sin_plus_2, double rate_level = 0.0);
  static DriftModel gamma_conv_drift(double mu, DriftKernelParams q, Rate rate = Rate::sin_plus_2,
                                     double rate_level = 0.0);

  double value(double t) const;  // A_t, closed form
  void validate() const;
  std::string describe() const;
};

struct SimConfig {
  double horizon = 1.0;      // T
  double delta_out = 2.5e-4; // output spacing
  int refine = 10;           // inner grid points per output step
  double truncation = 0.0;   // time units of kernel past retained; 0 = 20 e-folds
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;

  Eigen::Index n_out() const;
  void validate() const;
};

// Dense-factorization cap for exact core simulation.
inline constexpr Eigen::Index kMaxExactCoreSize = 1 << 14;

// Fraction of squared kernel mass the truncated past may discard.
inline constexpr double kSimTailTolerance = 1e-6;

// Exact stationary Gaussian core on an n-point grid: covariance R(|i-j|delta)
// factorized once (dense LLT with diagonal jitter retry), any number of draws
// against it.  Build cost O(n^3), draw cost O(n^2).
class GaussianCoreSampler {
 public:
  GaussianCoreSampler(const GammaKernelParams& params, Eigen::Index n, double delta);

  SamplePath draw(RngStream& rng) const;
  double jitter() const { return jitter_; }

 private:
  GammaKernelParams params_;
  Eigen::MatrixXd chol_;
  double delta_;
  double jitter_ = 0.0;
};

// Truncated-past Riemann scheme for the BSS process Y = A + X,
// X_t ~ sum_{m=1..M} g(b_m) sigma(t - m h) dB over inner cells of width
// h = delta_out/refine.  The in-cell evaluation points b_m match the cell
// variance of the power factor t^(nu-1) exactly, which keeps the increment
// variance bias at default refinement an order of magnitude below the
// left/midpoint choices.  The convolution runs through an FFT for large
// workloads and a direct sum for small ones; both routes are exposed so they
// can be cross-checked.
class BssSampler {
 public:
  enum class ConvRoute { automatic, direct, fft };

  BssSampler(const SimConfig& cfg, const GammaKernelParams& params, const VolatilityModel& vol,
             const DriftModel& drift, ConvRoute route = ConvRoute::automatic);

  // channel 0 drives B, channel 1 drives the exp-OU volatility (if any)
  SamplePath draw(RngStream& noise, RngStream& vol_noise, SamplePath* vol_out = nullptr) const;

  double tail_mass() const { return tail_mass_; }
  Eigen::Index inner_cells() const { return m_cells_; }

 private:
  SimConfig cfg_;
  GammaKernelParams params_;
  VolatilityModel vol_;
  DriftModel drift_;
  bool use_fft_ = false;
  double h_ = 0.0;
  Eigen::Index m_cells_ = 0;   // truncated kernel length M
  Eigen::Index n_in_ = 0;      // inner steps across [0, T]
  double tail_mass_ = 0.0;
  Eigen::ArrayXd weights_;     // g(b_m), m = 1..M
  Eigen::ArrayXd sigma_grid_;  // deterministic sigma at inner cell left edges
  Eigen::ArrayXd drift_grid_;  // A at output times
  std::vector<std::complex<double>> kernel_spec_;  // cached kernel FFT
  Eigen::Index fft_len_ = 0;
};

// One path of the Gaussian core on the output grid (exact method; the grid
// size guard applies).
SamplePath simulate_gaussian_core(const SimConfig& cfg, const GammaKernelParams& params);

// One path of Y = A + X for the BSS case.
SamplePath simulate_bss(const SimConfig& cfg, const GammaKernelParams& params,
                        const VolatilityModel& vol, const DriftModel& drift,
                        SamplePath* vol_out = nullptr);

// One path of Y_t = A_t + int_0^t sigma dB (Brownian martingale plus drift),
// exact Gaussian increments on the refined grid, subsampled to the output
// grid.
SamplePath simulate_semimartingale(const SimConfig& cfg, const VolatilityModel& vol,
                                   const DriftModel& drift, SamplePath* vol_out = nullptr);

enum class LimitKind { consistency, clt };

struct NegligibilityResult {
  bool negligible = false;
  std::string explanation;
};

// Decides, symbolically from the gamma exponents (c(delta) scales like
// delta^(nu-1/2)), whether the drift term washes out of the limit theorem:
//   abs_cont      consistency  nu < 3/2            clt  nu < 3/2 - 1/(2p)
//   gamma_conv    consistency  min(eta,1) > nu-1/2  clt  min(eta,1) > nu-(p-1)/(2p)
// The semimartingale case is the nu = 1 evaluation.  The absolutely
// continuous criterion requires p >= 1.
NegligibilityResult check_drift_negligibility(double nu, double p, const DriftModel& drift,
                                              LimitKind regime);

}  // namespace relvar
