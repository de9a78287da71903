#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "relvar/numeric.h"
#include "relvar/rng.h"
#include "support.h"

using namespace relvar;

TEST_CASE("adaptive quadrature: smooth oracles") {
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::cos(x) * std::cos(x); }, 0.0, 1.0) ==
        doctest::Approx(frozen::kIntCosSq).epsilon(1e-13));
  // nastier: oscillatory
  CHECK(integrate([](double x) { return std::sin(50.0 * x); }, 0.0, 1.0) ==
        doctest::Approx((1.0 - std::cos(50.0)) / 50.0).epsilon(1e-11));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("adaptive quadrature: endpoint singularity via substitution") {
  // int_0^1 u^{-1/3} du = 3/2 after u = w^{3/2}
  auto sub = [](double w) {
    const double u = std::pow(w, 1.5);
    return std::pow(u, -1.0 / 3.0) * 1.5 * std::sqrt(w);
  };
  CHECK(integrate(sub, 0.0, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature: refuses an impossible budget") {
  auto rough = [](double x) { return std::sin(1.0 / (x + 1e-6)); };
  CHECK_THROWS_AS(integrate(rough, 0.0, 1.0, 1e-15, 0.0, 8), truncation_error);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), domain_error);
}

TEST_CASE("normal cdf/quantile round-trip") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(frozen::kZ975).epsilon(1e-13));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  for (double x : {-5.0, -2.2, -0.3, 0.0, 0.7, 1.96, 3.1, 4.5}) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-11));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), domain_error);
}

TEST_CASE("gauss-hermite rule integrates normal moments exactly") {
  const auto rule = gauss_hermite(12);
  CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
  double m2 = 0, m4 = 0, m8 = 0, asym = 0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m2 += w * x * x;
    m4 += w * x * x * x * x;
    m8 += w * std::pow(x, 8);
    asym += w * x * x * x;
  }
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(m8 == doctest::Approx(105.0).epsilon(1e-12));
  CHECK(std::abs(asym) < 1e-12);
  CHECK_THROWS_AS(gauss_hermite(0), domain_error);
}

TEST_CASE("ls_slope recovers exact lines") {
  CHECK(ls_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(ls_slope({1, 1}, {0, 1}), domain_error);
}

TEST_CASE("rng streams: determinism and separation") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  // distinct streams / seeds should decorrelate immediately
  CHECK(c.next_u64() != d.next_u64());
  std::set<std::uint64_t> starts;
  for (std::uint64_t r = 0; r < 100000; ++r) starts.insert(RngStream(42, r).state());
  CHECK(starts.size() == 100000);  // no stream-id collisions
}

TEST_CASE("ziggurat normal sampler: moments against theory") {
  RngStream rng(2024, 0);
  const int n = 10000000;
  double s1 = 0, s2 = 0, s4 = 0, s6 = 0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    s6 += std::pow(x, 6);
    if (std::abs(x) > 3.442619855899) ++tail;  // the ziggurat base edge
  }
  const double inv = 1.0 / n;
  CHECK(std::abs(s1 * inv) < 3.0 * std::sqrt(inv));                    // 3 SE
  CHECK(std::abs(s2 * inv - 1.0) < 3.0 * std::sqrt(2.0 * inv));
  CHECK(std::abs(s4 * inv - 3.0) < 3.0 * std::sqrt(96.0 * inv));
  CHECK(std::abs(s6 * inv - 15.0) < 3.0 * std::sqrt(10170.0 * inv));   // Var x^6 = m12 - 225
  // the tail branch must fire at the theoretical rate
  const double p_tail = 2.0 * (1.0 - 0.5 * std::erfc(-3.442619855899 * M_SQRT1_2));
  CHECK(std::abs(tail * inv - p_tail) < 4.0 * std::sqrt(p_tail * inv));
}

TEST_CASE("ziggurat agrees with the Box-Muller oracle (two-sample KS)") {
  RngStream r1(99, 1), r2(99, 2);
  const int n = 200000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = r1.next_normal();
    b[i] = r2.next_normal_bm();
  }
  // 1% two-sample critical value: 1.628 * sqrt(2/n)
  CHECK(testutil::two_sample_ks(a, b) < 1.628 * std::sqrt(2.0 / n));
}
