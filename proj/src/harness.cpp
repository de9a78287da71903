#include "relvar/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include <json.hpp>

#include "relvar/inference.h"
#include "relvar/numeric.h"
#include "relvar/rng.h"
#include "relvar/variation.h"

namespace relvar {

namespace {

using nlohmann::ordered_json;

constexpr const char* kReportSchema = "relvar-report/1";
constexpr const char* kConfigSchema = "relvar-experiment/1";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int resolve_threads(int hint, int count) {
  int t = hint > 0 ? hint : int(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  return std::min(t, std::max(count, 1));
}

// Builds replicate paths for one model on the experiment grid.  The BSS
// sampler is constructed once (kernel weights, FFT plan) and shared across
// worker threads; draw() is thread-safe.
class PathFactory {
 public:
  PathFactory(const ExperimentConfig& cfg, const ModelSpec& model) : model_(model) {
    base_.horizon = cfg.horizon;
    base_.delta_out = cfg.horizon / cfg.n_obs;
    base_.refine = model.refine;
    base_.seed = cfg.seed;
    if (model.process == ModelSpec::Process::bss)
      sampler_ = std::make_unique<BssSampler>(base_, *model.kernel, model.vol, model.drift);
  }

  SamplePath draw(std::uint64_t rep) const {
    if (sampler_) {
      RngStream noise = path_stream(base_.seed, rep, 0);
      RngStream vol_noise = path_stream(base_.seed, rep, 1);
      return sampler_->draw(noise, vol_noise);
    }
    SimConfig sc = base_;
    sc.replicate = rep;
    return simulate_semimartingale(sc, model_.vol, model_.drift);
  }

 private:
  ModelSpec model_;
  SimConfig base_;
  std::unique_ptr<BssSampler> sampler_;
};

std::vector<double> collect(const std::vector<ReplicateSummary>& reps, const std::string& group,
                            const std::string& key) {
  std::vector<double> v;
  for (const auto& r : reps) {
    if (!r.valid || r.group != group) continue;
    auto it = r.stats.find(key);
    if (it != r.stats.end()) v.push_back(it->second);
  }
  return v;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_var(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size() - 1);
}

// large-sample standard error of a sample median, sqrt(pi/2) * sd / sqrt(n)
double median_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return 1.2533141373155003 * std::sqrt(sample_var(v) / double(v.size()));
}

double rate_se(double r, int n) { return n > 0 ? std::sqrt(r * (1.0 - r) / n) : 0.0; }

void add_criterion(ExperimentReport& rep, std::string name, double observed, double lo,
                   double hi) {
  const bool ok = std::isfinite(observed) && observed >= lo && observed <= hi;
  rep.criteria.push_back({std::move(name), observed, lo, hi, ok});
  if (!ok) rep.passed = false;
}

// marks the report failed when a group produced no usable replicates
bool guard_valid(ExperimentReport& rep, const std::string& group) {
  int valid = 0;
  int total = 0;
  for (const auto& r : rep.replicates)
    if (r.group == group) {
      ++total;
      valid += r.valid ? 1 : 0;
    }
  rep.aggregates["valid_replicates_" + group] = double(valid);
  if (valid > 0) return true;
  add_criterion(rep, "valid replicates present (" + group + ")", 0.0, 1.0, double(total));
  for (const auto& r : rep.replicates)
    if (r.group == group) {
      rep.notes.push_back(group + " replicates failed: " + r.note);
      break;
    }
  return false;
}

std::string lag_key(const char* prefix, int lag) { return prefix + std::to_string(lag); }

// ---- JSON (de)serialization -------------------------------------------------

const char* process_name(ModelSpec::Process p) {
  return p == ModelSpec::Process::bss ? "bss" : "semimartingale";
}

const char* rate_name(DriftModel::Rate r) {
  switch (r) {
    case DriftModel::Rate::zero: return "zero";
    case DriftModel::Rate::sin_plus_2: return "sin_plus_2";
    case DriftModel::Rate::constant: return "constant";
  }
  return "sin_plus_2";
}

DriftModel::Rate rate_from_name(const std::string& s) {
  if (s == "zero") return DriftModel::Rate::zero;
  if (s == "sin_plus_2") return DriftModel::Rate::sin_plus_2;
  if (s == "constant") return DriftModel::Rate::constant;
  throw config_error("experiment config: unknown drift rate '" + s + "'");
}

ordered_json vol_json(const VolatilityModel& v) {
  switch (v.kind) {
    case VolatilityModel::Kind::constant:
      return {{"kind", "constant"}, {"level", v.level}};
    case VolatilityModel::Kind::piecewise:
      return {{"kind", "piecewise"}, {"breakpoints", v.breakpoints}, {"levels", v.levels}};
    case VolatilityModel::Kind::sinusoidal:
      return {{"kind", "sinusoidal"},
              {"base", v.base},
              {"amplitude", v.amplitude},
              {"period", v.period}};
    case VolatilityModel::Kind::exp_ou:
      return {{"kind", "exp_ou"},
              {"mean", v.ou_mean},
              {"reversion", v.ou_reversion},
              {"volvol", v.ou_volvol}};
  }
  throw domain_error("volatility: unknown kind");
}

VolatilityModel vol_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return VolatilityModel::constant_vol(j.value("level", 1.0));
  if (kind == "piecewise")
    return VolatilityModel::piecewise_vol(j.at("breakpoints").get<std::vector<double>>(),
                                          j.at("levels").get<std::vector<double>>());
  if (kind == "sinusoidal")
    return VolatilityModel::sinusoidal_vol(j.value("base", 1.0), j.value("amplitude", 0.0),
                                           j.value("period", 1.0));
  if (kind == "exp_ou")
    return VolatilityModel::exp_ou_vol(j.value("mean", 0.0), j.value("reversion", 1.0),
                                       j.value("volvol", 0.5));
  throw config_error("experiment config: unknown volatility kind '" + kind + "'");
}

ordered_json drift_json(const DriftModel& d) {
  switch (d.kind) {
    case DriftModel::Kind::none:
      return {{"kind", "none"}};
    case DriftModel::Kind::abs_cont:
      return {{"kind", "abs_cont"},
              {"mu", d.mu},
              {"rate", rate_name(d.rate)},
              {"level", d.rate_level}};
    case DriftModel::Kind::gamma_conv:
      return {{"kind", "gamma_conv"},
              {"mu", d.mu},
              {"rate", rate_name(d.rate)},
              {"level", d.rate_level},
              {"kernel",
               {{"c_prime", d.kernel.c_prime}, {"eta", d.kernel.eta}, {"rho", d.kernel.rho}}}};
  }
  throw domain_error("drift: unknown kind");
}

DriftModel drift_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return DriftModel::none_drift();
  const double mu = j.value("mu", 0.0);
  const DriftModel::Rate rate = rate_from_name(j.value("rate", std::string("sin_plus_2")));
  const double level = j.value("level", 0.0);
  if (kind == "abs_cont") return DriftModel::abs_cont_drift(mu, rate, level);
  if (kind == "gamma_conv") {
    DriftKernelParams q;
    if (j.contains("kernel")) {
      const auto& k = j["kernel"];
      q.c_prime = k.value("c_prime", q.c_prime);
      q.eta = k.value("eta", q.eta);
      q.rho = k.value("rho", q.rho);
    }
    return DriftModel::gamma_conv_drift(mu, q, rate, level);
  }
  throw config_error("experiment config: unknown drift kind '" + kind + "'");
}

ordered_json model_json(const ModelSpec& m) {
  ordered_json j;
  j["process"] = process_name(m.process);
  if (m.kernel)
    j["kernel"] = {{"c", m.kernel->c}, {"nu", m.kernel->nu}, {"lambda", m.kernel->lambda}};
  else
    j["kernel"] = nullptr;
  j["vol"] = vol_json(m.vol);
  j["drift"] = drift_json(m.drift);
  j["refine"] = m.refine;
  return j;
}

ModelSpec model_from_json(const ordered_json& j) {
  ModelSpec m;
  const std::string proc = j.value("process", std::string("semimartingale"));
  if (proc == "bss")
    m.process = ModelSpec::Process::bss;
  else if (proc == "semimartingale")
    m.process = ModelSpec::Process::semimartingale;
  else
    throw config_error("experiment config: unknown process '" + proc + "'");
  if (j.contains("kernel") && !j["kernel"].is_null()) {
    const auto& k = j["kernel"];
    GammaKernelParams params;
    params.c = k.value("c", params.c);
    params.nu = k.value("nu", params.nu);
    params.lambda = k.value("lambda", params.lambda);
    m.kernel = params;
  }
  if (j.contains("vol")) m.vol = vol_from_json(j["vol"]);
  if (j.contains("drift")) m.drift = drift_from_json(j["drift"]);
  m.refine = j.value("refine", m.refine);
  return m;
}

ordered_json tol_json(const Tolerances& t) {
  return {{"median_sup", t.median_sup},   {"coverage_half", t.coverage_half},
          {"student_mean", t.student_mean}, {"student_var", t.student_var},
          {"size_lo", t.size_lo},         {"size_hi", t.size_hi},
          {"power_min", t.power_min},     {"ks_distance", t.ks_distance},
          {"slope_tol", t.slope_tol},     {"nu_abs", t.nu_abs},
          {"drift_sup", t.drift_sup}};
}

Tolerances tol_from_json(const ordered_json& j) {
  Tolerances t;
  t.median_sup = j.value("median_sup", t.median_sup);
  t.coverage_half = j.value("coverage_half", t.coverage_half);
  t.student_mean = j.value("student_mean", t.student_mean);
  t.student_var = j.value("student_var", t.student_var);
  t.size_lo = j.value("size_lo", t.size_lo);
  t.size_hi = j.value("size_hi", t.size_hi);
  t.power_min = j.value("power_min", t.power_min);
  t.ks_distance = j.value("ks_distance", t.ks_distance);
  t.slope_tol = j.value("slope_tol", t.slope_tol);
  t.nu_abs = j.value("nu_abs", t.nu_abs);
  t.drift_sup = j.value("drift_sup", t.drift_sup);
  return t;
}

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["kind"] = kind_name(cfg.kind);
  j["model"] = model_json(cfg.model);
  ordered_json alts = ordered_json::array();
  for (const auto& a : cfg.alternatives) alts.push_back(model_json(a));
  j["alternatives"] = std::move(alts);
  j["horizon"] = cfg.horizon;
  j["n"] = cfg.n_obs;
  j["lags"] = cfg.lags;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["p"] = cfg.p;
  j["level"] = cfg.level;
  j["eval_time"] = cfg.eval_time;
  j["limit"] = cfg.limit == LimitKind::clt ? "clt" : "consistency";
  if (cfg.scaling_target)
    j["scaling_target"] = *cfg.scaling_target;
  else
    j["scaling_target"] = nullptr;
  j["tolerances"] = tol_json(cfg.tol);
  j["threads"] = cfg.threads;
  return j;
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::consistency: return "consistency";
    case ExperimentKind::clt_coverage: return "clt-coverage";
    case ExperimentKind::test_size: return "test-size";
    case ExperimentKind::test_power: return "test-power";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::nu_recovery: return "nu-recovery";
    case ExperimentKind::drift_negligibility: return "drift-negligibility";
  }
  throw domain_error("unknown experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::consistency, ExperimentKind::clt_coverage, ExperimentKind::test_size,
        ExperimentKind::test_power, ExperimentKind::scaling, ExperimentKind::nu_recovery,
        ExperimentKind::drift_negligibility}) {
    if (name == kind_name(k)) return k;
  }
  throw config_error("experiment config: unknown kind '" + name + "'");
}

double ModelSpec::nu() const {
  if (process == Process::semimartingale) return 1.0;
  if (!kernel) throw config_error("model: bss process needs gamma kernel parameters");
  return kernel->nu;
}

void ModelSpec::validate() const {
  vol.validate();
  drift.validate();
  if (refine < 1) throw config_error("model: refine must be >= 1");
  if (process == Process::bss) {
    if (!kernel) throw config_error("model: bss process needs gamma kernel parameters");
    kernel->validate();
  }
}

void Tolerances::validate() const {
  for (double t : {median_sup, coverage_half, student_mean, student_var, size_lo, size_hi,
                   power_min, ks_distance, slope_tol, nu_abs, drift_sup})
    if (!(t > 0.0) || !std::isfinite(t)) throw config_error("tolerances must be positive");
  if (size_lo >= size_hi) throw config_error("tolerances: size_lo must be below size_hi");
  if (size_hi >= 1.0 || power_min > 1.0 || coverage_half >= 0.5)
    throw config_error("tolerances: rate bounds must stay inside (0,1)");
}

void ExperimentConfig::validate() const {
  model.validate();
  for (const auto& a : alternatives) a.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw config_error("experiment: horizon must be positive");
  if (n_obs < 8) throw config_error("experiment: need at least 8 observations per path");
  if (lags.empty()) throw config_error("experiment: lag schedule must not be empty");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] < 1) throw config_error("experiment: lags must be >= 1");
    if (i > 0 && lags[i] >= lags[i - 1])
      throw config_error("experiment: lag schedule must be strictly decreasing");
  }
  if (lags.front() * 4 > n_obs)
    throw config_error("experiment: coarsest lag leaves fewer than 4 increments");
  if (replicates < 1) throw config_error("experiment: replicate count must be >= 1");
  if (!(p > 0.0)) throw config_error("experiment: power p must be positive");
  if (!(level > 0.0 && level < 1.0)) throw config_error("experiment: level must lie in (0,1)");
  if (threads < 0) throw config_error("experiment: threads hint must be >= 0");
  tol.validate();

  switch (kind) {
    case ExperimentKind::consistency:
      if (!model.vol.deterministic())
        throw config_error("consistency experiment needs deterministic volatility");
      break;
    case ExperimentKind::clt_coverage:
      if (!model.vol.deterministic())
        throw config_error("clt-coverage experiment needs deterministic volatility");
      if (!(eval_time > 0.0 && eval_time < horizon))
        throw config_error("clt-coverage: evaluation time must lie strictly inside (0, horizon)");
      break;
    case ExperimentKind::test_power:
      if (alternatives.empty())
        throw config_error("test-power experiment needs at least one alternative model");
      break;
    case ExperimentKind::scaling:
      if (lags.size() < 3) throw config_error("scaling experiment needs at least 3 lags");
      if (p != 2.0) throw config_error("scaling experiment targets are defined for p = 2");
      break;
    case ExperimentKind::drift_negligibility:
      if (model.drift.kind == DriftModel::Kind::none)
        throw config_error("drift-negligibility experiment needs a drift model");
      break;
    default:
      break;
  }
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw input_error(std::string("experiment config: ") + e.what());
  }
  try {
    const std::string schema = j.value("schema", std::string(kConfigSchema));
    if (schema != kConfigSchema)
      throw config_error("experiment config: unsupported schema '" + schema + "'");
    ExperimentConfig cfg;
    cfg.kind = kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("model")) cfg.model = model_from_json(j["model"]);
    if (j.contains("alternatives"))
      for (const auto& a : j["alternatives"]) cfg.alternatives.push_back(model_from_json(a));
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.n_obs = j.value("n", cfg.n_obs);
    cfg.lags = j.value("lags", cfg.lags);
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.p = j.value("p", cfg.p);
    cfg.level = j.value("level", cfg.level);
    cfg.eval_time = j.value("eval_time", cfg.eval_time);
    if (j.contains("limit")) {
      const std::string lim = j["limit"].get<std::string>();
      if (lim == "clt")
        cfg.limit = LimitKind::clt;
      else if (lim == "consistency")
        cfg.limit = LimitKind::consistency;
      else
        throw config_error("experiment config: unknown limit kind '" + lim + "'");
    }
    if (j.contains("scaling_target") && !j["scaling_target"].is_null())
      cfg.scaling_target = j["scaling_target"].get<double>();
    if (j.contains("tolerances")) cfg.tol = tol_from_json(j["tolerances"]);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
  } catch (const ordered_json::exception& e) {
    throw config_error(std::string("experiment config: ") + e.what());
  }
}

namespace detail {

std::vector<ReplicateSummary> replicate_map(
    int count, std::uint64_t first, int threads, const std::string& group,
    const std::function<void(std::uint64_t rep, ReplicateSummary& out)>& work) {
  std::vector<ReplicateSummary> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[std::size_t(i)].replicate = first + std::uint64_t(i);
    out[std::size_t(i)].group = group;
  }
  auto run_one = [&](int i) {
    ReplicateSummary& s = out[std::size_t(i)];
    try {
      work(s.replicate, s);
    } catch (const std::exception& e) {
      s.valid = false;
      s.stats.clear();
      s.note = e.what();
    }
  };
  const int nt = resolve_threads(threads, count);
  if (nt <= 1) {
    for (int i = 0; i < count; ++i) run_one(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(nt));
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) run_one(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw input_error("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

ExperimentReport run_consistency(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::consistency)
    throw config_error("run_consistency: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const double delta = cfg.horizon / cfg.n_obs;
  const double total = integrated_power(cfg.model.vol, cfg.p, cfg.horizon);
  std::vector<Eigen::ArrayXd> exact(cfg.lags.size());
  if (total > 0.0) {
    for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
      const int m = cfg.lags[li];
      const Eigen::Index count = cfg.n_obs / m;
      const double denom = integrated_power(cfg.model.vol, cfg.p, delta * m * double(count));
      Eigen::ArrayXd e(count);
      for (Eigen::Index j = 0; j < count; ++j)
        e[j] = integrated_power(cfg.model.vol, cfg.p, delta * m * double(j + 1)) / denom;
      exact[li] = std::move(e);
    }
  }

  PathFactory factory(cfg, cfg.model);
  rep.replicates = detail::replicate_map(
      cfg.replicates, 0, cfg.threads, "h0", [&](std::uint64_t r, ReplicateSummary& out) {
        if (total <= 0.0)
          throw degenerate_input_error("consistency: integrated power of sigma vanishes");
        SamplePath path = factory.draw(r);
        for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
          const int m = cfg.lags[li];
          RelativeVariation rel = relative_power_variation(path, m, cfg.p);
          out.stats[lag_key("sup_dev_lag", m)] = (rel.values - exact[li]).abs().maxCoeff();
        }
      });

  if (guard_valid(rep, "h0")) {
    std::vector<double> med(cfg.lags.size());
    for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
      const std::string key = lag_key("sup_dev_lag", cfg.lags[li]);
      auto v = collect(rep.replicates, "h0", key);
      med[li] = detail::median_of(v);
      rep.aggregates["median_" + key] = med[li];
      rep.aggregates["se_median_" + key] = median_se(v);
    }
    add_criterion(rep, "median sup deviation at finest lag (tol.median_sup)", med.back(), 0.0,
                  cfg.tol.median_sup);
    if (cfg.lags.size() > 1) {
      double worst = -1.0;
      for (std::size_t i = 0; i + 1 < med.size(); ++i) worst = std::max(worst, med[i + 1] - med[i]);
      add_criterion(rep, "median sup deviation decreases along the lag schedule", worst, -1.0, 0.0);
    }
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_clt_coverage(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::clt_coverage)
    throw config_error("run_clt_coverage: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const int m = cfg.lags.back();
  const double delta = cfg.horizon / cfg.n_obs;
  const double retained_horizon = delta * m * double(cfg.n_obs / m);
  const double denom = integrated_power(cfg.model.vol, cfg.p, retained_horizon);
  if (!(denom > 0.0))
    throw degenerate_input_error("clt-coverage: integrated power of sigma vanishes");
  const double truth = integrated_power(cfg.model.vol, cfg.p, cfg.eval_time) / denom;
  const double z = normal_quantile(1.0 - cfg.level / 2.0);
  const InferenceMode mode = cfg.model.process == ModelSpec::Process::bss
                                 ? InferenceMode::bss_plugin
                                 : InferenceMode::semimartingale;

  PathFactory factory(cfg, cfg.model);
  rep.replicates = detail::replicate_map(
      cfg.replicates, 0, cfg.threads, "h0", [&](std::uint64_t r, ReplicateSummary& out) {
        SamplePath path = factory.draw(r);
        const double lam = lambda_for_inference(path, m, cfg.p, mode);
        RelativeVariation rel = relative_power_variation(path, m, cfg.p);
        const double est = rel.value_at(cfg.eval_time);
        const double v = asy_variance_estimator(path, m, cfg.p, cfg.eval_time, lam);
        if (!(v > 0.0))
          throw degenerate_input_error("clt-coverage: zero variance estimate at eval time");
        const double sd = std::sqrt(rel.delta * v);
        const double hw = z * sd;
        out.stats["student"] = (est - truth) / sd;
        out.stats["covered"] =
            (std::max(est - hw, 0.0) <= truth && truth <= std::min(est + hw, 1.0)) ? 1.0 : 0.0;
        out.stats["vhat"] = v;
      });

  if (guard_valid(rep, "h0")) {
    const auto student = collect(rep.replicates, "h0", "student");
    const auto covered = collect(rep.replicates, "h0", "covered");
    const double coverage = mean_of(covered);
    rep.aggregates["coverage"] = coverage;
    rep.aggregates["coverage_se"] = rate_se(coverage, int(covered.size()));
    rep.aggregates["student_mean"] = mean_of(student);
    rep.aggregates["student_var"] = sample_var(student);
    rep.aggregates["median_vhat"] =
        detail::median_of(collect(rep.replicates, "h0", "vhat"));
    add_criterion(rep, "CI coverage near nominal level (tol.coverage_half)", coverage,
                  1.0 - cfg.level - cfg.tol.coverage_half,
                  1.0 - cfg.level + cfg.tol.coverage_half);
    add_criterion(rep, "studentised statistic mean (tol.student_mean)",
                  rep.aggregates["student_mean"], -cfg.tol.student_mean, cfg.tol.student_mean);
    add_criterion(rep, "studentised statistic variance (tol.student_var)",
                  rep.aggregates["student_var"], 1.0 - cfg.tol.student_var,
                  1.0 + cfg.tol.student_var);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_test_size_power(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::test_size && cfg.kind != ExperimentKind::test_power)
    throw config_error("run_test_size_power: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const int m = cfg.lags.back();
  const double ks_crit = ks_limit_quantile(1.0 - cfg.level);
  const double cvm_crit = CvmTable::instance().quantile(1.0 - cfg.level);
  rep.aggregates["critical_ks"] = ks_crit;
  rep.aggregates["critical_cvm"] = cvm_crit;

  auto run_group = [&](const ModelSpec& model, const std::string& group, std::uint64_t first) {
    PathFactory factory(cfg, model);
    const InferenceMode mode = model.process == ModelSpec::Process::bss
                                   ? InferenceMode::bss_plugin
                                   : InferenceMode::semimartingale;
    auto batch = detail::replicate_map(
        cfg.replicates, first, cfg.threads, group, [&](std::uint64_t r, ReplicateSummary& out) {
          SamplePath path = factory.draw(r);
          const double lam = lambda_for_inference(path, m, cfg.p, mode);
          const LambdaSource src = mode == InferenceMode::bss_plugin
                                       ? LambdaSource::nu_hat_plugin
                                       : LambdaSource::analytic;
          out.stats["ks_stat"] = ks_statistic(path, m, cfg.p, lam, src).statistic;
          out.stats["cvm_stat"] = cvm_statistic(path, m, cfg.p, lam, src).statistic;
          out.stats["ks_reject"] = out.stats["ks_stat"] > ks_crit ? 1.0 : 0.0;
          out.stats["cvm_reject"] = out.stats["cvm_stat"] > cvm_crit ? 1.0 : 0.0;
          out.stats["lambda"] = lam;
        });
    rep.replicates.insert(rep.replicates.end(), batch.begin(), batch.end());
  };

  run_group(cfg.model, "h0", 0);
  if (guard_valid(rep, "h0")) {
    const auto ks_rej = collect(rep.replicates, "h0", "ks_reject");
    const auto cvm_rej = collect(rep.replicates, "h0", "cvm_reject");
    const double size_ks = mean_of(ks_rej);
    const double size_cvm = mean_of(cvm_rej);
    rep.aggregates["size_ks"] = size_ks;
    rep.aggregates["size_cvm"] = size_cvm;
    rep.aggregates["size_se_ks"] = rate_se(size_ks, int(ks_rej.size()));
    rep.aggregates["size_se_cvm"] = rate_se(size_cvm, int(cvm_rej.size()));
    const double dist =
        empirical_ks_distance(collect(rep.replicates, "h0", "ks_stat"),
                              [](double x) { return ks_limit_cdf(x); });
    rep.aggregates["null_ks_distance"] = dist;
    add_criterion(rep, "KS rejection rate under H0 (tol.size_lo..size_hi)", size_ks,
                  cfg.tol.size_lo, cfg.tol.size_hi);
    add_criterion(rep, "CvM rejection rate under H0 (tol.size_lo..size_hi)", size_cvm,
                  cfg.tol.size_lo, cfg.tol.size_hi);
    add_criterion(rep, "empirical null KS statistics match the limit law (tol.ks_distance)",
                  dist, 0.0, cfg.tol.ks_distance);
  }

  for (std::size_t i = 0; i < cfg.alternatives.size(); ++i) {
    const std::string group = "alt" + std::to_string(i);
    run_group(cfg.alternatives[i], group, std::uint64_t(cfg.replicates) * (i + 1));
    if (!guard_valid(rep, group)) continue;
    const double pow_ks = mean_of(collect(rep.replicates, group, "ks_reject"));
    const double pow_cvm = mean_of(collect(rep.replicates, group, "cvm_reject"));
    rep.aggregates["power_ks_" + group] = pow_ks;
    rep.aggregates["power_cvm_" + group] = pow_cvm;
    add_criterion(rep, "KS rejection rate under " + group + " (tol.power_min)", pow_ks,
                  cfg.tol.power_min, 1.0);
    add_criterion(rep, "CvM rejection rate under " + group + " (tol.power_min)", pow_cvm,
                  cfg.tol.power_min, 1.0);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_scaling(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::scaling) throw config_error("run_scaling: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const double target = cfg.scaling_target
                            ? *cfg.scaling_target
                            : (cfg.model.process == ModelSpec::Process::bss
                                   ? 2.0 * (cfg.model.nu() - 1.0)
                                   : 0.0);
  PathFactory factory(cfg, cfg.model);
  rep.replicates = detail::replicate_map(
      cfg.replicates, 0, cfg.threads, "h0", [&](std::uint64_t r, ReplicateSummary& out) {
        SamplePath path = factory.draw(r);
        out.stats["slope"] = scaling_exponent(path, cfg.lags, cfg.p);
      });

  if (guard_valid(rep, "h0")) {
    const auto slopes = collect(rep.replicates, "h0", "slope");
    const double med = detail::median_of(slopes);
    rep.aggregates["median_slope"] = med;
    rep.aggregates["se_median_slope"] = median_se(slopes);
    rep.aggregates["target_slope"] = target;
    add_criterion(rep, "median log-log slope near the regime target (tol.slope_tol)", med,
                  target - cfg.tol.slope_tol, target + cfg.tol.slope_tol);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_nu_recovery(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::nu_recovery)
    throw config_error("run_nu_recovery: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const int m = cfg.lags.back();
  const double target = cfg.model.nu();
  const bool rough = cfg.model.process == ModelSpec::Process::bss && target < 1.0;

  PathFactory factory(cfg, cfg.model);
  rep.replicates = detail::replicate_map(
      cfg.replicates, 0, cfg.threads, "h0", [&](std::uint64_t r, ReplicateSummary& out) {
        SamplePath path = factory.draw(r);
        const double nu_hat = cof_estimate_nu(path, m);
        out.stats["nu_hat"] = nu_hat;
        out.stats["abs_err"] = std::abs(nu_hat - target);
        out.stats["lambda_plugin"] = lambda_p(std::clamp(nu_hat, 0.51, 0.99), cfg.p);
      });

  if (guard_valid(rep, "h0")) {
    const auto errs = collect(rep.replicates, "h0", "abs_err");
    rep.aggregates["median_nu_hat"] =
        detail::median_of(collect(rep.replicates, "h0", "nu_hat"));
    rep.aggregates["median_abs_err"] = detail::median_of(errs);
    rep.aggregates["se_median_abs_err"] = median_se(errs);
    rep.aggregates["median_lambda_plugin"] =
        detail::median_of(collect(rep.replicates, "h0", "lambda_plugin"));
    rep.aggregates["target_nu"] = target;
    add_criterion(rep, "median |nu^ - nu| (tol.nu_abs)", rep.aggregates["median_abs_err"], 0.0,
                  cfg.tol.nu_abs);
    if (rough)
      add_criterion(rep, "plug-in lambda exceeds the semimartingale constant",
                    rep.aggregates["median_lambda_plugin"], semimartingale_lambda(cfg.p), 100.0);
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_drift_negligibility(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::drift_negligibility)
    throw config_error("run_drift_negligibility: config kind mismatch");
  cfg.validate();
  Stopwatch clock;
  ExperimentReport rep;
  rep.config = cfg;

  const NegligibilityResult pred =
      check_drift_negligibility(cfg.model.nu(), cfg.p, cfg.model.drift, cfg.limit);
  rep.aggregates["predicate"] = pred.negligible ? 1.0 : 0.0;
  rep.notes.push_back(pred.explanation);

  const double delta = cfg.horizon / cfg.n_obs;
  Eigen::ArrayXd curve(cfg.n_obs + 1);
  for (int j = 0; j <= cfg.n_obs; ++j) curve[j] = cfg.model.drift.value(delta * j);

  ModelSpec bare = cfg.model;
  bare.drift = DriftModel::none_drift();
  PathFactory factory(cfg, bare);
  rep.replicates = detail::replicate_map(
      cfg.replicates, 0, cfg.threads, "h0", [&](std::uint64_t r, ReplicateSummary& out) {
        SamplePath base = factory.draw(r);
        SamplePath drifted = base;
        drifted.values += curve;
        for (int m : cfg.lags) {
          RelativeVariation rel0 = relative_power_variation(base, m, cfg.p);
          RelativeVariation reld = relative_power_variation(drifted, m, cfg.p);
          out.stats[lag_key("sup_diff_lag", m)] = (reld.values - rel0.values).abs().maxCoeff();
        }
      });

  if (guard_valid(rep, "h0")) {
    std::vector<double> med(cfg.lags.size());
    for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
      const std::string key = lag_key("sup_diff_lag", cfg.lags[li]);
      auto v = collect(rep.replicates, "h0", key);
      med[li] = detail::median_of(v);
      rep.aggregates["median_" + key] = med[li];
      rep.aggregates["se_median_" + key] = median_se(v);
    }
    if (pred.negligible) {
      add_criterion(rep, "median coupled sup difference at finest lag (tol.drift_sup)",
                    med.back(), 0.0, cfg.tol.drift_sup);
      if (cfg.lags.size() > 1) {
        double worst = -1.0;
        for (std::size_t i = 0; i + 1 < med.size(); ++i)
          worst = std::max(worst, med[i + 1] - med[i]);
        add_criterion(rep, "coupled sup difference decreases along the lag schedule", worst, -1.0,
                      0.0);
      }
    } else {
      rep.notes.push_back(
          "predicate false: coupled differences reported for information, no bound asserted");
    }
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::consistency: return run_consistency(cfg);
    case ExperimentKind::clt_coverage: return run_clt_coverage(cfg);
    case ExperimentKind::test_size:
    case ExperimentKind::test_power: return run_test_size_power(cfg);
    case ExperimentKind::scaling: return run_scaling(cfg);
    case ExperimentKind::nu_recovery: return run_nu_recovery(cfg);
    case ExperimentKind::drift_negligibility: return run_drift_negligibility(cfg);
  }
  throw config_error("run_experiment: unknown kind");
}

std::string ExperimentReport::to_json(bool with_timing) const {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["config"] = config_json(config);
  // the parallelism hint is an execution detail, not experiment identity
  j["config"].erase("threads");
  ordered_json reps = ordered_json::array();
  for (const auto& r : replicates) {
    ordered_json e;
    e["id"] = r.replicate;
    e["group"] = r.group;
    e["valid"] = r.valid;
    if (!r.note.empty()) e["note"] = r.note;
    e["stats"] = r.stats;
    reps.push_back(std::move(e));
  }
  j["replicates"] = std::move(reps);
  j["aggregates"] = aggregates;
  j["notes"] = notes;
  ordered_json crits = ordered_json::array();
  for (const auto& c : criteria)
    crits.push_back({{"name", c.name},
                     {"observed", c.observed},
                     {"lo", c.lo},
                     {"hi", c.hi},
                     {"passed", c.passed}});
  j["criteria"] = std::move(crits);
  j["passed"] = passed;
  if (with_timing) j["timing"] = {{"wall_seconds", wall_seconds}, {"threads", config.threads}};
  return j.dump(2) + "\n";
}

}  // namespace relvar
