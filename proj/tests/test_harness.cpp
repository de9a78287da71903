#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "relvar/harness.h"
#include "relvar/rng.h"
#include "support.h"

using namespace relvar;

namespace {

ExperimentConfig base_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.threads = 1;
  return cfg;
}

ModelSpec bss_model(double nu, double lambda = 2.0, int refine = 4) {
  ModelSpec m;
  m.process = ModelSpec::Process::bss;
  m.kernel = GammaKernelParams{1.0, nu, lambda};
  m.refine = refine;
  return m;
}

double recompute_median(const ExperimentReport& rep, const std::string& group,
                        const std::string& key) {
  std::vector<double> v;
  for (const auto& r : rep.replicates)
    if (r.valid && r.group == group && r.stats.count(key)) v.push_back(r.stats.at(key));
  return testutil::median(v);
}

}  // namespace

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg = base_config(ExperimentKind::consistency);
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("replicate count") {
    cfg.replicates = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("lag schedule must decrease") {
    cfg.lags = {2, 4};
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.lags = {};
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.lags = {4, 4};
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("tolerances positive") {
    cfg.tol.median_sup = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("bss model needs a kernel") {
    cfg.model.process = ModelSpec::Process::bss;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("stochastic vol rejected where an exact target is needed") {
    cfg.model.vol = VolatilityModel::exp_ou_vol(0.0, 1.0, 0.5);
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("clt needs an interior time") {
    cfg.kind = ExperimentKind::clt_coverage;
    cfg.eval_time = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.eval_time = 1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("scaling needs three lags and p = 2") {
    cfg.kind = ExperimentKind::scaling;
    cfg.lags = {2, 1};
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.lags = {4, 2, 1};
    cfg.p = 1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("power needs alternatives, drift run needs drift") {
    cfg.kind = ExperimentKind::test_power;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.kind = ExperimentKind::drift_negligibility;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SUBCASE("kind mismatch is rejected by the runners") {
    CHECK_THROWS_AS(run_scaling(cfg), config_error);
  }
}

TEST_CASE("consistency: constant-sigma semimartingale and the sigma = 0 guard") {
  ExperimentConfig cfg = base_config(ExperimentKind::consistency);
  cfg.n_obs = 4000;
  cfg.replicates = 60;
  cfg.seed = 101;
  cfg.lags = {4, 2, 1};
  ExperimentReport rep = run_consistency(cfg);

  CHECK(rep.passed);
  CHECK(rep.aggregates.at("valid_replicates_h0") == 60.0);
  CHECK(rep.aggregates.at("median_sup_dev_lag1") < 0.05);
  CHECK(rep.aggregates.at("median_sup_dev_lag1") < rep.aggregates.at("median_sup_dev_lag4"));
  REQUIRE(rep.criteria.size() == 2);
  CHECK(rep.criteria[0].hi == cfg.tol.median_sup);  // bound cites the config tolerance
  for (const auto& c : rep.criteria) CHECK(c.passed);

  // aggregates are reproducible from the per-replicate summaries
  CHECK(rep.aggregates.at("median_sup_dev_lag2") ==
        recompute_median(rep, "h0", "sup_dev_lag2"));

  // sigma = 0: every replicate surfaces the degenerate-input error, the run
  // itself completes and reports the failure
  cfg.model.vol = VolatilityModel::constant_vol(0.0);
  cfg.replicates = 6;
  ExperimentReport dead = run_consistency(cfg);
  CHECK(!dead.passed);
  CHECK(dead.aggregates.at("valid_replicates_h0") == 0.0);
  for (const auto& r : dead.replicates) {
    CHECK(!r.valid);
    CHECK(r.note.find("vanishes") != std::string::npos);
  }
}

TEST_CASE("consistency: piecewise sigma on a rough BSS path") {
  ExperimentConfig cfg = base_config(ExperimentKind::consistency);
  cfg.model = bss_model(5.0 / 6.0);
  cfg.model.vol = VolatilityModel::piecewise_vol({0.5}, {1.0, 2.0});
  cfg.n_obs = 4000;
  cfg.replicates = 40;
  cfg.seed = 102;
  cfg.lags = {2, 1};
  ExperimentReport rep = run_consistency(cfg);
  CHECK(rep.passed);
  CHECK(rep.aggregates.at("median_sup_dev_lag1") < 0.05);
}

TEST_CASE("clt coverage at the midpoint") {
  ExperimentConfig cfg = base_config(ExperimentKind::clt_coverage);
  cfg.n_obs = 4000;
  cfg.replicates = 1000;
  cfg.seed = 103;
  ExperimentReport rep = run_clt_coverage(cfg);

  CHECK(rep.passed);
  const double cov = rep.aggregates.at("coverage");
  CHECK(cov >= 0.925);
  CHECK(cov <= 0.975);
  CHECK(std::abs(rep.aggregates.at("student_mean")) < 0.1);
  CHECK(rep.aggregates.at("student_var") > 0.8);
  CHECK(rep.aggregates.at("student_var") < 1.2);
  CHECK(rep.aggregates.at("median_vhat") == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("test size and power with a relabeled alternative") {
  ExperimentConfig cfg = base_config(ExperimentKind::test_power);
  cfg.n_obs = 2000;
  cfg.replicates = 300;
  cfg.seed = 104;
  ModelSpec doubled;
  doubled.vol = VolatilityModel::piecewise_vol({0.5}, {1.0, 2.0});
  cfg.alternatives = {doubled, cfg.model};  // genuine alternative + relabeled null
  cfg.tol.power_min = 0.001;                // keep the relabeled run informational

  ExperimentReport rep = run_test_size_power(cfg);
  const double size_ks = rep.aggregates.at("size_ks");
  const double size_cvm = rep.aggregates.at("size_cvm");
  CHECK(size_ks >= 0.03);
  CHECK(size_ks <= 0.08);
  CHECK(size_cvm >= 0.03);
  CHECK(size_cvm <= 0.08);
  CHECK(rep.aggregates.at("null_ks_distance") < 0.05);

  // the doubling alternative is caught essentially always
  CHECK(rep.aggregates.at("power_ks_alt0") >= 0.90);
  CHECK(rep.aggregates.at("power_cvm_alt0") >= 0.90);

  // a relabeled null has power equal to size up to MC noise
  CHECK(std::abs(rep.aggregates.at("power_ks_alt1") - size_ks) < 0.05);
  CHECK(std::abs(rep.aggregates.at("power_cvm_alt1") - size_cvm) < 0.05);

  // distinct stream ids across groups and channels: no replicate reuse
  std::set<std::uint64_t> ids;
  for (const auto& r : rep.replicates) CHECK(ids.insert(r.replicate).second);
}

TEST_CASE("scaling: rough target, semimartingale target, exact linear path") {
  ExperimentConfig cfg = base_config(ExperimentKind::scaling);
  cfg.lags = {8, 4, 2, 1};
  cfg.n_obs = 4000;
  cfg.replicates = 50;
  cfg.seed = 105;

  SUBCASE("nu = 5/6 lands near -1/3") {
    cfg.model = bss_model(5.0 / 6.0);
    ExperimentReport rep = run_scaling(cfg);
    CHECK(rep.passed);
    CHECK(rep.aggregates.at("target_slope") == doctest::Approx(-1.0 / 3.0));
    CHECK(std::abs(rep.aggregates.at("median_slope") + 1.0 / 3.0) < 0.05);
  }
  SUBCASE("brownian semimartingale lands near 0") {
    ExperimentReport rep = run_scaling(cfg);
    CHECK(rep.passed);
    CHECK(std::abs(rep.aggregates.at("median_slope")) < 0.05);
  }
  SUBCASE("deterministic linear path has slope exactly 1") {
    cfg.model.vol = VolatilityModel::constant_vol(0.0);
    cfg.model.drift = DriftModel::abs_cont_drift(0.0, DriftModel::Rate::constant, 1.0);
    cfg.scaling_target = 1.0;
    cfg.tol.slope_tol = 1e-9;
    cfg.replicates = 3;
    ExperimentReport rep = run_scaling(cfg);
    CHECK(rep.passed);
    CHECK(rep.aggregates.at("median_slope") == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("nu recovery via change of frequency") {
  ExperimentConfig cfg = base_config(ExperimentKind::nu_recovery);
  cfg.n_obs = 4096;
  cfg.replicates = 60;
  cfg.seed = 106;

  SUBCASE("brownian case recovers nu = 1") {
    ExperimentReport rep = run_nu_recovery(cfg);
    CHECK(rep.passed);
    CHECK(rep.aggregates.at("median_abs_err") < 0.05);
    CHECK(rep.criteria.size() == 1);  // no plug-in bound outside the rough regime
  }
  SUBCASE("rough case recovers nu = 5/6 and the plug-in exceeds 2") {
    cfg.model = bss_model(5.0 / 6.0);
    cfg.n_obs = 8192;
    cfg.replicates = 40;
    ExperimentReport rep = run_nu_recovery(cfg);
    CHECK(rep.passed);
    CHECK(rep.aggregates.at("median_abs_err") < 0.05);
    CHECK(rep.aggregates.at("median_lambda_plugin") > 2.0);
  }
}

TEST_CASE("drift negligibility on coupled noise") {
  ExperimentConfig cfg = base_config(ExperimentKind::drift_negligibility);
  cfg.model = bss_model(5.0 / 6.0);
  cfg.model.drift = DriftModel::gamma_conv_drift(0.0, DriftKernelParams{1.0, 1.0, 1.0});
  cfg.n_obs = 4000;
  cfg.replicates = 40;
  cfg.seed = 107;
  cfg.lags = {4, 2, 1};

  ExperimentReport rep = run_drift_negligibility(cfg);
  CHECK(rep.passed);
  CHECK(rep.aggregates.at("predicate") == 1.0);
  CHECK(rep.aggregates.at("median_sup_diff_lag1") < 0.02);
  CHECK(rep.aggregates.at("median_sup_diff_lag1") <=
        rep.aggregates.at("median_sup_diff_lag4"));
  REQUIRE(!rep.notes.empty());

  SUBCASE("absolutely continuous drift on a semimartingale") {
    ExperimentConfig sm = base_config(ExperimentKind::drift_negligibility);
    sm.model.drift = DriftModel::abs_cont_drift(0.5);
    sm.n_obs = 4000;
    sm.replicates = 30;
    sm.seed = 108;
    sm.lags = {2, 1};
    ExperimentReport r2 = run_drift_negligibility(sm);
    CHECK(r2.aggregates.at("predicate") == 1.0);
    CHECK(r2.passed);
    CHECK(r2.aggregates.at("median_sup_diff_lag1") < 0.02);
  }
  SUBCASE("clt regime with a slow drift kernel is informational only") {
    ExperimentConfig weak = base_config(ExperimentKind::drift_negligibility);
    weak.model = bss_model(0.95);
    weak.model.drift = DriftModel::gamma_conv_drift(0.0, DriftKernelParams{1.0, 0.5, 1.0});
    weak.limit = LimitKind::clt;
    weak.n_obs = 1000;
    weak.replicates = 8;
    weak.seed = 109;
    ExperimentReport r3 = run_drift_negligibility(weak);
    CHECK(r3.aggregates.at("predicate") == 0.0);
    CHECK(r3.passed);  // nothing asserted
    CHECK(r3.criteria.empty());
    bool informational = false;
    for (const auto& n : r3.notes)
      if (n.find("no bound asserted") != std::string::npos) informational = true;
    CHECK(informational);
  }
}

TEST_CASE("reports are deterministic across parallelism settings") {
  ExperimentConfig cfg = base_config(ExperimentKind::clt_coverage);
  cfg.n_obs = 1000;
  cfg.replicates = 40;
  cfg.seed = 110;

  cfg.threads = 1;
  const std::string one = run_clt_coverage(cfg).to_json(false);
  cfg.threads = 2;
  const std::string two = run_clt_coverage(cfg).to_json(false);
  cfg.threads = 4;
  const std::string four = run_clt_coverage(cfg).to_json(false);
  CHECK(one == two);
  CHECK(two == four);

  // replicate streams never collide: the (replicate, channel) map is injective
  std::set<std::uint64_t> ids;
  for (std::uint64_t rep = 0; rep < 1000; ++rep)
    for (std::uint64_t ch = 0; ch < 8; ++ch)
      CHECK(ids.insert(rep * 8 + ch).second);
}

TEST_CASE("report json is valid and the config round-trips") {
  ExperimentConfig cfg = base_config(ExperimentKind::test_size);
  cfg.model = bss_model(0.8);
  cfg.model.vol = VolatilityModel::sinusoidal_vol(1.0, 0.25, 1.0);
  cfg.model.drift = DriftModel::abs_cont_drift(0.1);
  cfg.n_obs = 500;
  cfg.replicates = 4;
  cfg.seed = 111;
  ExperimentReport rep = run_test_size_power(cfg);

  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("schema") == "relvar-report/1");
  CHECK(j.at("config").at("kind") == "test-size");
  CHECK(j.at("config").at("tolerances").at("size_lo") == cfg.tol.size_lo);
  CHECK(j.at("replicates").size() == 4);
  CHECK(j.contains("timing"));
  CHECK(!nlohmann::json::parse(rep.to_json(false)).contains("timing"));

  // config serialization round-trips through the experiment schema
  ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.kind == cfg.kind);
  CHECK(back.model.process == ModelSpec::Process::bss);
  CHECK(back.model.kernel->nu == 0.8);
  CHECK(back.model.vol.kind == VolatilityModel::Kind::sinusoidal);
  CHECK(back.model.drift.kind == DriftModel::Kind::abs_cont);
  CHECK(back.n_obs == cfg.n_obs);
  CHECK(back.lags == cfg.lags);
  CHECK(back.seed == cfg.seed);
  CHECK(back.tol.size_hi == cfg.tol.size_hi);
  CHECK(config_to_json(back) == config_to_json(cfg));

  CHECK_THROWS_AS(config_from_json("{ not json"), input_error);
  CHECK_THROWS_AS(config_from_json(R"({"kind":"no-such-experiment"})"), config_error);
  CHECK_THROWS_AS(config_from_json(R"({"schema":"relvar-experiment/9","kind":"scaling"})"),
                  config_error);
  CHECK_THROWS_AS(config_from_json(R"({"kind":"scaling","lags":"oops"})"), config_error);
}
