#include "relvar/variation.h"

#include <cmath>
#include <iostream>

#include "relvar/errors.h"
#include "relvar/numeric.h"

namespace relvar {
namespace {

double abs_power(double d, double p) {
  if (p == 2.0) return d * d;
  if (p == 1.0) return std::abs(d);
  return std::pow(std::abs(d), p);
}

// shared lookup: cumulative series value at the grid time nearest t, zero
// before the first difference
double series_value_at(const Eigen::ArrayXd& values, double t0, double delta, int order, double t,
                       bool* snapped) {
  const double pos = (t - t0) / delta - double(order);
  double idx = std::round(pos);
  if (snapped) *snapped = std::abs(pos - idx) > 1e-9;
  if (idx < -0.5) {
    // nearest grid point below the first difference: variation is still zero,
    // but times before t0 are a caller error
    if (t < t0 - 1e-9 * delta) throw input_error("variation: time before the start of the path");
    return 0.0;
  }
  if (idx > double(values.size() - 1) + 0.5)
    throw input_error("variation: time beyond the last grid point");
  return values[std::min<Eigen::Index>(Eigen::Index(idx), values.size() - 1)];
}

}  // namespace

double VariationSeries::value_at(double t, bool* snapped) const {
  return series_value_at(values, t0, delta, order, t, snapped);
}

double RelativeVariation::value_at(double t, bool* snapped) const {
  return series_value_at(values, t0, delta, order, t, snapped);
}

VariationSeries power_variation(const SamplePath& path, int lag_multiple, double p, int order) {
  path.validate();
  if (lag_multiple < 1) throw input_error("power variation: lag multiple must be >= 1");
  if (!(p > 0.0)) throw input_error("power variation: order p must be positive");
  if (order != 1 && order != 2) throw input_error("power variation: difference order is 1 or 2");

  const Eigen::Index m = lag_multiple;
  const Eigen::Index retained = (path.n_obs() - 1) / m + 1;
  if (retained < order + 1)
    throw input_error("power variation: fewer than " + std::to_string(order + 1) +
                      " observations at this lag");

  VariationSeries out;
  out.p = p;
  out.delta = path.delta * double(m);
  out.order = order;
  out.t0 = path.t0;
  out.horizon = path.t0 + out.delta * double(retained - 1);
  out.values.resize(retained - order);

  double acc = 0.0;
  if (order == 1) {
    for (Eigen::Index j = 1; j < retained; ++j) {
      acc += abs_power(path.values[j * m] - path.values[(j - 1) * m], p);
      out.values[j - 1] = acc;
    }
  } else {
    for (Eigen::Index j = 2; j < retained; ++j) {
      acc += abs_power(path.values[j * m] - 2.0 * path.values[(j - 1) * m] +
                           path.values[(j - 2) * m],
                       p);
      out.values[j - 2] = acc;
    }
  }
  return out;
}

RelativeVariation relative_power_variation(const SamplePath& path, int lag_multiple, double p,
                                           int order) {
  VariationSeries raw = power_variation(path, lag_multiple, p, order);
  const double total = raw.terminal();
  if (!(total > 0.0))
    throw degenerate_input_error(
        "relative variation: terminal power variation is zero (constant path), the ratio is "
        "undefined");
  RelativeVariation out;
  out.p = raw.p;
  out.delta = raw.delta;
  out.order = raw.order;
  out.t0 = raw.t0;
  out.horizon = raw.horizon;
  out.values = raw.values / total;
  return out;
}

VariationSeries scaled_variation(const SamplePath& path, int lag_multiple, double p,
                                 const std::optional<GammaKernelParams>& params) {
  VariationSeries out = power_variation(path, lag_multiple, p, 1);
  const double scale_sd = params ? c_delta(out.delta, *params) : std::sqrt(out.delta);
  out.values *= out.delta / std::pow(scale_sd, p);
  return out;
}

double relative_energy_dissipation(const SamplePath& path, int lag_multiple, double t, double u,
                                   double T) {
  VariationSeries raw = power_variation(path, lag_multiple, 2.0, 1);
  if (!(u > 0.0)) throw input_error("energy dissipation: duration must be positive");
  if (t < path.t0 - 1e-9 * raw.delta || t + u > T + 1e-9 * raw.delta || T > raw.horizon + 1e-9 * raw.delta)
    throw input_error("energy dissipation: need t0 <= t < t+u <= T <= horizon");

  bool s1 = false, s2 = false, s3 = false;
  const double total = raw.value_at(T, &s1);
  if (!(total > 0.0))
    throw degenerate_input_error("energy dissipation: total quadratic variation over [0,T] is zero");
  const double hi = raw.value_at(t + u, &s2);
  const double lo = raw.value_at(t, &s3);
  if (s1 || s2 || s3)
    std::clog << "note: energy dissipation endpoints snapped to the lag grid (delta = "
              << raw.delta << ")\n";
  const double r1 = std::round((t - path.t0) / raw.delta);
  const double r2 = std::round((t + u - path.t0) / raw.delta);
  if (r1 == r2) throw input_error("energy dissipation: interval is empty after grid snapping");
  return (hi - lo) / total;
}

VariationSeries energy_dissipation_estimate(const SamplePath& path, int lag_multiple) {
  VariationSeries out = power_variation(path, lag_multiple, 2.0, 1);
  out.values /= out.delta;
  return out;
}

double scaling_exponent(const SamplePath& path, const std::vector<int>& lag_multiples, double p) {
  std::vector<double> log_delta, log_var;
  for (int m : lag_multiples) {
    VariationSeries v = power_variation(path, m, p, 1);
    if (v.terminal() > 0.0) {
      log_delta.push_back(std::log(v.delta));
      log_var.push_back(std::log(v.terminal()));
    }
  }
  if (log_delta.size() < 3)
    throw input_error("scaling exponent: need at least 3 lags with non-zero variation");
  return ls_slope(log_delta, log_var);
}

}  // namespace relvar
