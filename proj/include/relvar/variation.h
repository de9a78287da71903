#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "relvar/kernels.h"
#include "relvar/simulate.h"

namespace relvar {

// Cumulative realised power variation sum_j |d_j|^p on the (possibly
// decimated) grid of spacing delta = lag_multiple * path spacing.  values[j]
// is the variation accumulated by time time_of(j); the first difference of
// order k lands at t0 + k*delta.  horizon is the time of the last retained
// observation -- trailing observations that do not fill a whole lag are
// dropped.
struct VariationSeries {
  double p = 2.0;
  double delta = 0.0;
  int order = 1;
  double t0 = 0.0;
  double horizon = 0.0;
  Eigen::ArrayXd values;

  Eigen::Index count() const { return values.size(); }
  double terminal() const { return values[values.size() - 1]; }
  double time_of(Eigen::Index j) const { return t0 + delta * double(j + order); }
  // cumulative variation at the grid time nearest to t (0 before the first
  // difference); *snapped reports whether t had to move materially
  double value_at(double t, bool* snapped = nullptr) const;
};

// Power variation normalised by its terminal value: values in [0,1],
// non-decreasing, terminal exactly 1.
struct RelativeVariation {
  double p = 2.0;
  double delta = 0.0;
  int order = 1;
  double t0 = 0.0;
  double horizon = 0.0;
  Eigen::ArrayXd values;

  Eigen::Index count() const { return values.size(); }
  double time_of(Eigen::Index j) const { return t0 + delta * double(j + order); }
  double value_at(double t, bool* snapped = nullptr) const;
};

// Realised power variation of order-1 or order-2 differences.  lag_multiple
// decimates the grid first (observations 0, m, 2m, ... -- single anchor, no
// offset averaging).
VariationSeries power_variation(const SamplePath& path, int lag_multiple, double p, int order = 1);

// Pointwise ratio to the terminal variation.  Constant paths have no scale to
// divide by and are refused.
RelativeVariation relative_power_variation(const SamplePath& path, int lag_multiple, double p,
                                           int order = 1);

// (delta / c(delta)^p) * variation: with the kernel's c(delta) this converges
// to m_p * integrated |sigma|^p; without params the semimartingale scaling
// c(delta) = sqrt(delta) applies.
VariationSeries scaled_variation(const SamplePath& path, int lag_multiple, double p,
                                 const std::optional<GammaKernelParams>& params = std::nullopt);

// Share of quadratic variation accumulated on (t, t+u], relative to the total
// over [0, T]:  R(t, t+u) = y~(t+u) - y~(t).  Endpoints snap to the nearest
// grid time (with a note on the log); an interval that collapses under
// snapping is refused.
double relative_energy_dissipation(const SamplePath& path, int lag_multiple, double t, double u,
                                   double T);

// Normalised quadratic variation [y]^(2)_t / delta; for a differentiable
// path this recovers int_0^t (dy/ds)^2 ds.
VariationSeries energy_dissipation_estimate(const SamplePath& path, int lag_multiple);

// Least-squares slope of log [Y_delta]^(p)_T against log delta over the given
// lag multiples.  Slope 1 for differentiable paths, 0 for semimartingales,
// -2(1-nu) / 2(nu-1) in the rough / smooth kernel regimes.  Lags whose
// terminal variation vanishes are unusable; at least 3 must survive.
double scaling_exponent(const SamplePath& path, const std::vector<int>& lag_multiples,
                        double p = 2.0);

}  // namespace relvar
