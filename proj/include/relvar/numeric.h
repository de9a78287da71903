#pragma once

#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relvar/errors.h"

namespace relvar {
namespace detail {

// One (G7,K15) panel: returns {integral, error estimate |K15-G7|}.
template <class F>
std::pair<double, double> gk15_panel(F& f, double a, double b) {
  static constexpr double xgk[8] = {
      0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
      0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
  static constexpr double wgk[8] = {
      0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
      0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
  static constexpr double wg[4] = {
      0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const double f0 = f(c);
  double k15 = wgk[7] * f0;
  double g7 = wg[3] * f0;
  for (int i = 0; i < 7; ++i) {
    const double dx = hl * xgk[i];
    const double s = f(c - dx) + f(c + dx);
    k15 += wgk[i] * s;
    if (i & 1) g7 += wg[i / 2] * s;
  }
  return {k15 * hl, std::abs((k15 - g7) * hl)};
}

}  // namespace detail

// Adaptive quadrature over [a,b]: repeatedly bisects the worst panel until the
// accumulated error estimate meets max(abs_tol, rel_tol*|I|).  Panel nodes are
// interior, so endpoint singularities that have been made integrable by a
// substitution never get evaluated.  Throws truncation_error if the budget of
// panels is exhausted first.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                 int max_panels = 4000) {
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
    throw domain_error("integrate: bad interval");
  if (a == b) return 0.0;

  struct Panel {
    double err, a, b, val;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  std::priority_queue<Panel> queue;
  auto [v0, e0] = detail::gk15_panel(f, a, b);
  queue.push({e0, a, b, v0});
  double total = v0;
  double total_err = e0;
  int panels = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (panels >= max_panels)
      throw truncation_error("integrate: panel budget exhausted before tolerance was met");
    const Panel p = queue.top();
    queue.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(p.a < m && m < p.b)) {
      total_err -= p.err;  // interval at rounding limit; accept as is
      continue;
    }
    auto [v1, e1] = detail::gk15_panel(f, p.a, m);
    auto [v2, e2] = detail::gk15_panel(f, m, p.b);
    total += v1 + v2 - p.val;
    total_err += e1 + e2 - p.err;
    queue.push({e1, p.a, m, v1});
    queue.push({e2, m, p.b, v2});
    ++panels;
  }
  return total;
}

double normal_cdf(double x);

// Inverse of normal_cdf on (0,1); rational initial guess polished by one
// Halley step, accurate to ~1 ulp.
double normal_quantile(double p);

// Probabilists' Gauss-Hermite rule: E[h(Z)] ~ sum_i weights[i]*h(nodes[i])
// for Z standard normal; weights sum to one.  Nodes ascend.
struct GaussHermite {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};
GaussHermite gauss_hermite(int degree);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace relvar
