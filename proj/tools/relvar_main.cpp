// Command-line front end: simulation, subperiod analysis, dissipation curves,
// Monte Carlo experiments, and critical-value tables.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 experiment failed.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relvar/analysis.h"
#include "relvar/harness.h"
#include "relvar/inference.h"
#include "relvar/io.h"
#include "relvar/svg.h"
#include "relvar/variation.h"

namespace {

constexpr int kOk = 0, kUsage = 2, kData = 3, kFailed = 4;

using namespace relvar;

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, sep)) out.push_back(tok);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw config_error(what + ": cannot parse number '" + s + "'");
  return v;
}

// const:L | piecewise:b1,..:l0,l1,.. | sin:BASE:AMP:PERIOD | expou:MEAN:REV:VOLVOL
VolatilityModel parse_vol_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw config_error("sigma: empty spec");
  const std::string& kind = parts[0];
  if (kind == "const") {
    if (parts.size() != 2) throw config_error("sigma: expected const:LEVEL");
    return VolatilityModel::constant_vol(to_double(parts[1], "sigma level"));
  }
  if (kind == "piecewise") {
    if (parts.size() != 3) throw config_error("sigma: expected piecewise:BREAKS:LEVELS");
    std::vector<double> breaks, levels;
    for (const auto& b : split(parts[1], ',')) breaks.push_back(to_double(b, "sigma break"));
    for (const auto& l : split(parts[2], ',')) levels.push_back(to_double(l, "sigma level"));
    return VolatilityModel::piecewise_vol(std::move(breaks), std::move(levels));
  }
  if (kind == "sin") {
    if (parts.size() != 4) throw config_error("sigma: expected sin:BASE:AMPLITUDE:PERIOD");
    return VolatilityModel::sinusoidal_vol(to_double(parts[1], "sigma base"),
                                           to_double(parts[2], "sigma amplitude"),
                                           to_double(parts[3], "sigma period"));
  }
  if (kind == "expou") {
    if (parts.size() != 4) throw config_error("sigma: expected expou:MEAN:REVERSION:VOLVOL");
    return VolatilityModel::exp_ou_vol(to_double(parts[1], "sigma mean"),
                                       to_double(parts[2], "sigma reversion"),
                                       to_double(parts[3], "sigma volvol"));
  }
  throw config_error("sigma: unknown kind '" + kind + "' (const, piecewise, sin, expou)");
}

// none | abscont:MU | gammaconv:MU:ETA:RHO
DriftModel parse_drift_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty() || parts[0] == "none") return DriftModel::none_drift();
  if (parts[0] == "abscont") {
    if (parts.size() != 2) throw config_error("drift: expected abscont:MU");
    return DriftModel::abs_cont_drift(to_double(parts[1], "drift mu"));
  }
  if (parts[0] == "gammaconv") {
    if (parts.size() != 4) throw config_error("drift: expected gammaconv:MU:ETA:RHO");
    DriftKernelParams q;
    q.eta = to_double(parts[2], "drift eta");
    q.rho = to_double(parts[3], "drift rho");
    return DriftModel::gamma_conv_drift(to_double(parts[1], "drift mu"), q);
  }
  throw config_error("drift: unknown kind '" + parts[0] + "' (none, abscont, gammaconv)");
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

std::string default_out_dir() {
  const char* env = std::getenv("RELVAR_OUT_DIR");
  return env && *env ? env : ".";
}

struct SimulateArgs {
  std::string model = "bss";
  double nu = 5.0 / 6.0, lambda = 1.0, c = 1.0;
  std::string sigma = "const:1", drift = "none";
  int n = 4000, refine = 10;
  double delta = 0.0;  // 0 = 1/n
  std::uint64_t seed = 1, replicate = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, const std::string& out_dir) {
  SimConfig cfg;
  cfg.delta_out = a.delta > 0.0 ? a.delta : 1.0 / a.n;
  cfg.horizon = cfg.delta_out * a.n;
  cfg.refine = a.refine;
  cfg.seed = a.seed;
  cfg.replicate = a.replicate;

  const VolatilityModel vol = parse_vol_spec(a.sigma);
  const DriftModel drift = parse_drift_spec(a.drift);

  SamplePath path;
  std::ostringstream model_line;
  if (a.model == "bss") {
    GammaKernelParams params{a.c, a.nu, a.lambda};
    params.validate();
    path = simulate_bss(cfg, params, vol, drift);
    model_line << "model=bss nu=" << a.nu << " lambda=" << a.lambda << " c=" << a.c
               << " refine=" << a.refine;
  } else if (a.model == "bm" || a.model == "sm" || a.model == "semimartingale") {
    path = simulate_semimartingale(cfg, vol, drift);
    model_line << "model=semimartingale";
  } else {
    throw config_error("simulate: unknown model '" + a.model + "' (bss, bm)");
  }

  const std::string file = a.out.empty() ? out_path(out_dir, "path.csv") : a.out;
  write_path_csv(file, path,
                 {model_line.str(), "sigma=" + vol.describe(), "drift=" + drift.describe(),
                  "seed=" + std::to_string(a.seed) + " replicate=" + std::to_string(a.replicate),
                  "n=" + std::to_string(a.n) + " delta=" + fmt17(cfg.delta_out)});
  std::cout << "wrote " << path.values.size() << " observations to " << file << "\n";
  return kOk;
}

struct IngestArgs {
  std::string in;
  std::string format = "single";
  double delta = 0.0;
  int subsample = 1;
  bool log_transform = false;
};

SamplePath ingest(const IngestArgs& a, double subperiod = 0.0) {
  IngestSpec spec;
  spec.path = a.in;
  if (a.format == "single")
    spec.format = IngestSpec::Format::single_column;
  else if (a.format == "two")
    spec.format = IngestSpec::Format::two_column;
  else
    throw config_error("unknown input format '" + a.format + "' (single, two)");
  spec.delta = a.delta;
  spec.subsample = a.subsample;
  spec.subperiod = subperiod;
  spec.log_transform = a.log_transform;
  return ingest_series(spec);
}

int cmd_analyze(const IngestArgs& in_args, const AnalysisOptions& opt,
                const std::string& out_dir) {
  const SamplePath series = ingest(in_args, opt.subperiod);
  const AnalysisReport report = analyze_series(series, opt);

  write_text_file(out_path(out_dir, "analysis.json"), report.to_json());

  // every window's relative variation over the diagonal, in window-local time
  std::vector<SvgSeries> curves;
  const std::vector<std::string> palette = {"#2266cc", "#cc4422", "#22aa66", "#aa44aa",
                                            "#d4a017", "#2299bb", "#884422", "#557722"};
  double window_len = 0.0;
  for (const auto& s : report.subperiods) {
    if (s.skipped) continue;
    window_len = s.t_end - s.t_start;
    SvgSeries line;
    if (curves.size() < 6) line.label = "window " + std::to_string(s.index);
    line.color = palette[std::size_t(s.index) % palette.size()];
    line.x.reserve(std::size_t(s.rel.count()));
    line.y.reserve(std::size_t(s.rel.count()));
    for (Eigen::Index j = 0; j < s.rel.count(); ++j) {
      line.x.push_back(s.rel.time_of(j));
      line.y.push_back(s.rel.values[j]);
    }
    curves.push_back(std::move(line));
  }
  SvgSeries diag;
  diag.label = "t/T";
  diag.color = "#777777";
  diag.dashed = true;
  diag.x = {0.0, window_len};
  diag.y = {0.0, 1.0};
  curves.push_back(std::move(diag));
  write_svg_plot(out_path(out_dir, "analysis_curves.svg"),
                 "Relative power variation per window", "time within window",
                 "relative variation", curves,
                 {"relvar analyze p=" + std::to_string(opt.p), "input " + in_args.in});

  // p-values by window with the level line
  SvgSeries pks, pcvm, lvl;
  pks.label = "KS p-value";
  pcvm.label = "CvM p-value";
  pcvm.color = "#cc4422";
  lvl.label = "level";
  lvl.color = "#777777";
  lvl.dashed = true;
  for (const auto& s : report.subperiods) {
    if (s.skipped) continue;
    pks.x.push_back(s.index);
    pks.y.push_back(s.ks.p_value);
    pcvm.x.push_back(s.index);
    pcvm.y.push_back(s.cvm.p_value);
  }
  if (!pks.x.empty()) {
    lvl.x = {pks.x.front(), pks.x.back()};
    lvl.y = {opt.level, opt.level};
  }
  write_svg_plot(out_path(out_dir, "analysis_pvalues.svg"), "Homoskedasticity test p-values",
                 "window", "p-value", {pks, pcvm, lvl}, {"input " + in_args.in});

  for (const auto& s : report.subperiods) {
    std::cout << "window " << s.index << " [" << s.t_start << ", " << s.t_end << "): ";
    if (s.skipped) {
      std::cout << "skipped (" << s.note << ")\n";
      continue;
    }
    std::cout << "nu^=";
    if (std::isfinite(s.nu_hat))
      std::cout << s.nu_hat;
    else
      std::cout << "n/a";
    std::cout << " lambda=" << s.lambda << " KS=" << s.ks.statistic << " (p=" << s.ks.p_value
              << (s.ks_rejected ? ", reject" : "") << ") CvM=" << s.cvm.statistic
              << " (p=" << s.cvm.p_value << (s.cvm_rejected ? ", reject" : "") << ")";
    if (s.zero_increment_fraction > 0.0)
      std::cout << " zero-increments=" << s.zero_increment_fraction;
    std::cout << "\n";
  }
  std::cout << "analysed " << report.analysed << " windows, skipped " << report.skipped
            << "; rejected at " << opt.level << ": KS " << report.frac_reject_ks << ", CvM "
            << report.frac_reject_cvm << "\n";
  return kOk;
}

int cmd_dissipation(const IngestArgs& in_args, const std::string& lags_csv,
                    const std::string& out_dir) {
  std::vector<int> lags;
  for (const auto& tok : split(lags_csv, ','))
    lags.push_back(int(to_double(tok, "dissipation lag")));
  if (lags.empty()) throw config_error("dissipation: need at least one lag");

  const SamplePath series = ingest(in_args);
  std::vector<SvgSeries> curves;
  const std::vector<std::string> palette = {"#2266cc", "#cc4422", "#22aa66", "#aa44aa"};
  for (std::size_t i = 0; i < lags.size(); ++i) {
    RelativeVariation rel = relative_power_variation(series, lags[i], 2.0);
    std::ostringstream csv;
    csv << "# relvar dissipation lag=" << lags[i] << " input=" << in_args.in << "\n";
    csv << "# columns time,relative_qv\n";
    SvgSeries line;
    line.label = "lag " + std::to_string(lags[i]);
    line.color = palette[i % palette.size()];
    for (Eigen::Index j = 0; j < rel.count(); ++j) {
      csv << fmt17(rel.time_of(j)) << "," << fmt17(rel.values[j]) << "\n";
      line.x.push_back(rel.time_of(j));
      line.y.push_back(rel.values[j]);
    }
    write_text_file(out_path(out_dir, "dissipation_lag" + std::to_string(lags[i]) + ".csv"),
                    csv.str());
    curves.push_back(std::move(line));
  }
  SvgSeries diag;
  diag.label = "t/T";
  diag.color = "#777777";
  diag.dashed = true;
  diag.x = {series.t0, series.horizon()};
  diag.y = {0.0, 1.0};
  curves.push_back(std::move(diag));
  write_svg_plot(out_path(out_dir, "dissipation.svg"),
                 "Accumulated relative quadratic variation", "time", "relative QV", curves,
                 {"input " + in_args.in});
  std::cout << "wrote dissipation curves for " << lags.size() << " lag(s) to " << out_dir << "\n";
  return kOk;
}

int cmd_mc(const std::string& config_file, const std::string& out_file, int threads,
           const std::string& out_dir) {
  ExperimentConfig cfg = config_from_json(read_text_file(config_file));
  if (threads > 0) cfg.threads = threads;
  const ExperimentReport report = run_experiment(cfg);

  const std::string file = out_file.empty() ? out_path(out_dir, "report.json") : out_file;
  write_text_file(file, report.to_json());

  for (const auto& c : report.criteria)
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": observed=" << c.observed
              << " in [" << c.lo << ", " << c.hi << "]\n";
  std::cout << kind_name(cfg.kind) << " experiment " << (report.passed ? "passed" : "FAILED")
            << " in " << report.wall_seconds << " s; report written to " << file << "\n";
  return report.passed ? kOk : kFailed;
}

int cmd_tables(const std::string& out_file) {
  std::ostringstream os;
  os << "# homoskedasticity test critical values\n";
  os << "# KS: series evaluation; CvM: " << CvmTable::instance().build_info() << "\n";
  os << "statistic,level,critical_value\n";
  for (double a : {0.10, 0.05, 0.01})
    os << "KS," << a << "," << fmt17(ks_limit_quantile(1.0 - a)) << "\n";
  for (double a : {0.10, 0.05, 0.01})
    os << "CvM," << a << "," << fmt17(CvmTable::instance().quantile(1.0 - a)) << "\n";
  if (out_file.empty())
    std::cout << os.str();
  else
    write_text_file(out_file, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative power variation toolkit for BSS processes"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  app.add_option("--out-dir", out_dir, "output directory (default $RELVAR_OUT_DIR or .)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a model path and write it as CSV");
  SimulateArgs sim_args;
  sim->add_option("--model", sim_args.model, "bss or bm");
  sim->add_option("--nu", sim_args.nu, "gamma kernel smoothness");
  sim->add_option("--lambda", sim_args.lambda, "gamma kernel decay");
  sim->add_option("--c", sim_args.c, "gamma kernel scale");
  sim->add_option("--sigma", sim_args.sigma, "volatility spec, e.g. const:1, piecewise:0.5:1,2");
  sim->add_option("--drift", sim_args.drift, "drift spec: none, abscont:MU, gammaconv:MU:ETA:RHO");
  sim->add_option("--n", sim_args.n, "observations")->check(CLI::PositiveNumber);
  sim->add_option("--delta", sim_args.delta, "sampling interval (default 1/n)");
  sim->add_option("--refine", sim_args.refine, "inner grid refinement for bss");
  sim->add_option("--seed", sim_args.seed, "master seed");
  sim->add_option("--replicate", sim_args.replicate, "replicate index");
  sim->add_option("--out", sim_args.out, "output file (default OUT_DIR/path.csv)");

  // shared ingestion flags
  const auto add_ingest = [](CLI::App* cmd, IngestArgs& a, bool subsample_required) {
    cmd->add_option("--in", a.in, "input series file")->required();
    cmd->add_option("--format", a.format, "single (one value per line) or two (time,value CSV)");
    cmd->add_option("--delta", a.delta, "sampling interval (required for single-column input)");
    auto* sub = cmd->add_option("--subsample", a.subsample,
                                "analyse every k-th observation (guards the scaling range)");
    if (subsample_required) sub->required();
    cmd->add_flag("--log", a.log_transform, "analyse logarithms of the input values");
  };

  // analyze
  auto* ana = app.add_subcommand("analyze", "subperiod homoskedasticity analysis");
  IngestArgs ana_in;
  AnalysisOptions ana_opt;
  std::string ana_mode = "bss";
  add_ingest(ana, ana_in, /*subsample_required=*/true);
  ana->add_option("--subperiod", ana_opt.subperiod, "window length in time units (0 = whole)");
  ana->add_option("--power", ana_opt.p, "variation power p");
  ana->add_option("--level", ana_opt.level, "test and band level");
  ana->add_option("--mode", ana_mode, "sm (semimartingale) or bss (plug-in)");
  ana->add_option("--min-increments", ana_opt.min_increments, "minimum increments per window");

  // dissipation
  auto* dis = app.add_subcommand("dissipation", "accumulated relative QV curves at several lags");
  IngestArgs dis_in;
  std::string dis_lags = "1";
  add_ingest(dis, dis_in, /*subsample_required=*/false);
  dis->add_option("--lags", dis_lags, "comma-separated lag multiples, e.g. 1,4");

  // mc
  auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment from a config file");
  std::string mc_config, mc_out;
  int mc_threads = 0;
  mc->add_option("--config", mc_config, "experiment config JSON")->required();
  mc->add_option("--out", mc_out, "report file (default OUT_DIR/report.json)");
  mc->add_option("--threads", mc_threads, "override the config parallelism hint");

  // tables
  auto* tab = app.add_subcommand("tables", "print KS and CvM critical-value tables");
  std::string tab_out;
  tab->add_option("--out", tab_out, "write the table to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, out_dir);
    if (ana->parsed()) {
      if (ana_mode == "sm")
        ana_opt.mode = InferenceMode::semimartingale;
      else if (ana_mode == "bss")
        ana_opt.mode = InferenceMode::bss_plugin;
      else
        throw relvar::config_error("analyze: unknown mode '" + ana_mode + "' (sm, bss)");
      return cmd_analyze(ana_in, ana_opt, out_dir);
    }
    if (dis->parsed()) return cmd_dissipation(dis_in, dis_lags, out_dir);
    if (mc->parsed()) return cmd_mc(mc_config, mc_out, mc_threads, out_dir);
    if (tab->parsed()) return cmd_tables(tab_out);
  } catch (const relvar::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const relvar::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const relvar::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
