#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "relvar/simulate.h"
#include "relvar/variation.h"
#include "support.h"

using namespace relvar;

namespace {

SamplePath make_path(std::vector<double> vals, double delta = 1.0) {
  SamplePath p;
  p.t0 = 0.0;
  p.delta = delta;
  p.values = Eigen::Map<Eigen::ArrayXd>(vals.data(), Eigen::Index(vals.size()));
  return p;
}

SamplePath brownian(int n, double delta, std::uint64_t seed, std::uint64_t rep) {
  SimConfig cfg;
  cfg.horizon = delta * n;
  cfg.delta_out = delta;
  cfg.refine = 1;
  cfg.seed = seed;
  cfg.replicate = rep;
  return simulate_semimartingale(cfg, VolatilityModel::constant_vol(1.0),
                                 DriftModel::none_drift());
}

}  // namespace

TEST_CASE("power variation: hand sums and decimation") {
  auto p = make_path({0.0, 1.0, 3.0});
  auto v2 = power_variation(p, 1, 2.0);
  REQUIRE(v2.count() == 2);
  CHECK(v2.values[0] == 1.0);
  CHECK(v2.values[1] == 5.0);
  CHECK(v2.time_of(0) == 1.0);
  CHECK(v2.horizon == 2.0);

  auto v1 = power_variation(p, 1, 1.0);
  CHECK(v1.values[0] == 1.0);
  CHECK(v1.values[1] == 3.0);

  auto vd = power_variation(p, 1, 2.0, 2);
  REQUIRE(vd.count() == 1);
  CHECK(vd.values[0] == 1.0);  // 3 - 2*1 + 0
  CHECK(vd.time_of(0) == 2.0);

  // anchor-0 decimation: lag 2 keeps observations 0, 2 only
  auto q = make_path({0.0, 1.0, 3.0, 6.0});
  auto w = power_variation(q, 2, 2.0);
  REQUIRE(w.count() == 1);
  CHECK(w.values[0] == 9.0);
  CHECK(w.delta == 2.0);
  CHECK(w.horizon == 2.0);  // the trailing observation does not fill a lag
  auto w3 = power_variation(q, 3, 2.0);
  CHECK(w3.values[0] == 36.0);

  CHECK_THROWS_AS(power_variation(q, 4, 2.0), input_error);
  CHECK_THROWS_AS(power_variation(q, 2, 2.0, 2), input_error);
  CHECK_THROWS_AS(power_variation(q, 0, 2.0), input_error);
  CHECK_THROWS_AS(power_variation(q, 1, -1.0), input_error);
  CHECK_THROWS_AS(power_variation(q, 1, 2.0, 3), input_error);
}

TEST_CASE("relative variation: hand values, linear path, degenerate input") {
  auto p = make_path({0.0, 1.0, 3.0});
  auto r = relative_power_variation(p, 1, 2.0);
  CHECK(r.values[0] == doctest::Approx(0.2));
  CHECK(r.values[1] == 1.0);

  // equal increments: exactly j/n
  const int n = 17;
  std::vector<double> lin(n + 1);
  for (int j = 0; j <= n; ++j) lin[std::size_t(j)] = 0.37 * j;
  auto rl = relative_power_variation(make_path(lin, 0.25), 1, 2.0);
  for (Eigen::Index j = 0; j < rl.count(); ++j)
    CHECK(rl.values[j] == doctest::Approx(double(j + 1) / n).epsilon(1e-13));

  CHECK_THROWS_AS(relative_power_variation(make_path({1.0, 1.0, 1.0}), 1, 2.0),
                  degenerate_input_error);
}

TEST_CASE("relative variation: constant-sigma semimartingale approaches t/T") {
  // sup_t |y~ - t/T| has the Kolmogorov scale sqrt(delta lambda) / (m_p sqrt(T));
  // the median over replicates sits near the distribution's median
  const int n = 4000;
  std::vector<double> sups;
  for (int rep = 0; rep < 31; ++rep) {
    SamplePath y = brownian(n, 2.5e-4, 99, std::uint64_t(rep));
    auto rel = relative_power_variation(y, 1, 2.0);
    double sup = 0.0;
    for (Eigen::Index j = 0; j < rel.count(); ++j)
      sup = std::max(sup, std::abs(rel.values[j] - double(j + 1) / double(rel.count())));
    sups.push_back(sup);
  }
  // median of the limit law: kKsQ50 * sqrt(2 delta) at p=2, T=1, lambda=2
  const double scale = std::sqrt(2.0 * 2.5e-4);
  CHECK(testutil::median(sups) > 0.2 * frozen::kKsQ50 * scale);
  CHECK(testutil::median(sups) < 3.0 * frozen::kKsQ50 * scale);
}

TEST_CASE("variation invariants on a simulated path") {
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.delta_out = 1e-3;
  cfg.refine = 2;
  cfg.seed = 31;
  GammaKernelParams params{1.0, 5.0 / 6.0, 2.0};
  SamplePath y = simulate_bss(cfg, params, VolatilityModel::constant_vol(1.0),
                              DriftModel::none_drift());

  for (double p : {1.0, 2.0, 3.0}) {
    auto v = power_variation(y, 1, p);
    CHECK(v.values[0] >= 0.0);
    for (Eigen::Index j = 1; j < v.count(); ++j) CHECK(v.values[j] >= v.values[j - 1]);
    auto r = relative_power_variation(y, 1, p);
    CHECK(r.values[r.count() - 1] == 1.0);  // exactly
    CHECK((r.values >= 0.0).all());
    CHECK((r.values <= 1.0).all());
  }

  // scale equivariance: k^p on the raw series, nothing on the relative one
  SamplePath ky = y;
  ky.values *= 3.0;
  auto v = power_variation(y, 1, 1.5);
  auto kv = power_variation(ky, 1, 1.5);
  const double kp = std::pow(3.0, 1.5);
  CHECK(((kv.values - kp * v.values).abs() <= 1e-12 * kp * v.values).all());
  auto r = relative_power_variation(y, 1, 1.5);
  auto kr = relative_power_variation(ky, 1, 1.5);
  CHECK(((kr.values - r.values).abs() <= 1e-12).all());

  // translation invariance is exact
  SamplePath ty = y;
  ty.values += 42.0;
  auto tv = power_variation(ty, 1, 2.0);
  CHECK(((tv.values - power_variation(y, 1, 2.0).values).abs() <=
         1e-12 * power_variation(y, 1, 2.0).terminal())
            .all());

  // self-scaling: normalising the scaled variation reproduces the relative
  // variation -- the c(delta) factor cancels
  auto sv = scaled_variation(y, 1, 2.0, params);
  Eigen::ArrayXd from_scaled = sv.values / sv.terminal();
  CHECK(((from_scaled - relative_power_variation(y, 1, 2.0).values).abs() <= 5e-15).all());

  // and the semimartingale scaling is delta / delta^{p/2}
  auto sm = scaled_variation(y, 1, 2.0);
  CHECK(sm.terminal() == doctest::Approx(power_variation(y, 1, 2.0).terminal()).epsilon(1e-14));
}

TEST_CASE("relative energy dissipation: exact cases, additivity, snapping") {
  // differentiable ramp: every squared increment equal, so shares are lengths
  const int n = 100;
  std::vector<double> ramp(n + 1);
  for (int j = 0; j <= n; ++j) ramp[std::size_t(j)] = 0.01 * j;
  SamplePath y = make_path(ramp, 0.01);

  CHECK(relative_energy_dissipation(y, 1, 0.2, 0.3, 1.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(relative_energy_dissipation(y, 1, 0.0, 1.0, 1.0) == 1.0);  // exact normalisation

  const double a = relative_energy_dissipation(y, 1, 0.1, 0.2, 1.0);
  const double b = relative_energy_dissipation(y, 1, 0.3, 0.4, 1.0);
  const double c = relative_energy_dissipation(y, 1, 0.1, 0.6, 1.0);
  CHECK(std::abs(a + b - c) <= 5e-16);

  // off-grid endpoints snap to the nearest grid time
  CHECK(relative_energy_dissipation(y, 1, 0.213, 0.287, 1.0) ==
        doctest::Approx(relative_energy_dissipation(y, 1, 0.21, 0.29, 1.0)));
  CHECK_THROWS_AS(relative_energy_dissipation(y, 1, 0.212, 0.002, 1.0), input_error);
  CHECK_THROWS_AS(relative_energy_dissipation(y, 1, 0.5, 0.6, 1.0), input_error);
  CHECK_THROWS_AS(relative_energy_dissipation(y, 1, 0.1, -0.2, 1.0), input_error);
  CHECK_THROWS_AS(relative_energy_dissipation(make_path({1, 1, 1, 1}), 1, 0.0, 1.0, 3.0),
                  degenerate_input_error);

  // T may sit strictly inside the path
  CHECK(relative_energy_dissipation(y, 1, 0.0, 0.25, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("relative energy dissipation: piecewise-sigma split (MC)") {
  // sigma = 1 on [0,1/2), 2 on [1/2,1]: share of [0,1/2] is 0.5/2.5
  auto pw = VolatilityModel::piecewise_vol({0.5}, {1.0, 2.0});
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.delta_out = 1e-4;
  cfg.refine = 1;
  cfg.seed = 707;
  std::vector<double> shares;
  for (int rep = 0; rep < 200; ++rep) {
    cfg.replicate = std::uint64_t(rep);
    SamplePath y = simulate_semimartingale(cfg, pw, DriftModel::none_drift());
    shares.push_back(relative_energy_dissipation(y, 1, 0.0, 0.5, 1.0));
  }
  CHECK(testutil::median(shares) == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("energy dissipation estimate: differentiable oracles") {
  const int n = 100;
  std::vector<double> lin(n + 1);
  for (int j = 0; j <= n; ++j) lin[std::size_t(j)] = 2.0 * 0.01 * j;
  auto est = energy_dissipation_estimate(make_path(lin, 0.01), 1);
  CHECK(est.terminal() == doctest::Approx(4.0).epsilon(1e-9));

  const int m = 1000;
  std::vector<double> sine(m + 1);
  for (int j = 0; j <= m; ++j) sine[std::size_t(j)] = std::sin(1e-3 * j);
  auto est2 = energy_dissipation_estimate(make_path(sine, 1e-3), 1);
  CHECK(est2.terminal() == doctest::Approx(frozen::kIntCosSq).epsilon(1e-3));

  auto flat = energy_dissipation_estimate(make_path({3.0, 3.0, 3.0}), 1);
  CHECK((flat.values == 0.0).all());
}

TEST_CASE("scaling exponent: differentiable slope is one, semimartingale slope is zero") {
  const int n = 1 << 14;
  std::vector<double> lin(std::size_t(n + 1));
  for (int j = 0; j <= n; ++j) lin[std::size_t(j)] = 0.3 * j;
  SamplePath ramp = make_path(lin, 1.0 / n);
  CHECK(scaling_exponent(ramp, {1, 2, 4, 8, 16}) == doctest::Approx(1.0).epsilon(1e-10));

  std::vector<double> slopes;
  for (int rep = 0; rep < 100; ++rep)
    slopes.push_back(scaling_exponent(brownian(n, 1.0 / n, 512, std::uint64_t(rep)),
                                      {1, 2, 4, 8, 16}));
  CHECK(std::abs(testutil::median(slopes)) < 0.05);

  CHECK_THROWS_AS(scaling_exponent(ramp, {1, 2}), input_error);
  CHECK_THROWS_AS(scaling_exponent(make_path({1.0, 1.0, 1.0, 1.0, 1.0}), {1, 2, 4}), input_error);
}

TEST_CASE("series time lookup: snapping flag and range errors") {
  auto p = make_path({0.0, 1.0, 3.0, 4.0, 8.0}, 0.5);
  auto v = power_variation(p, 1, 2.0);
  bool snapped = false;
  CHECK(v.value_at(1.0, &snapped) == v.values[1]);
  CHECK(!snapped);
  CHECK(v.value_at(1.1, &snapped) == v.values[1]);
  CHECK(snapped);
  CHECK(v.value_at(0.2, &snapped) == 0.0);  // below the first difference
  CHECK(v.value_at(0.0) == 0.0);
  CHECK_THROWS_AS(v.value_at(2.6), input_error);
  CHECK_THROWS_AS(v.value_at(-0.4), input_error);
}
