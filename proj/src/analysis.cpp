#include "relvar/analysis.h"

#include <cmath>

#include <json.hpp>

#include "relvar/io.h"

namespace relvar {

void AnalysisOptions::validate() const {
  if (!(p > 0.0)) throw config_error("analysis: power p must be positive");
  if (!(level > 0.0 && level < 1.0)) throw config_error("analysis: level must lie in (0,1)");
  if (subperiod < 0.0 || !std::isfinite(subperiod))
    throw config_error("analysis: subperiod length must be >= 0");
  if (min_increments < 8) throw config_error("analysis: need at least 8 increments per window");
}

AnalysisReport analyze_series(const SamplePath& series, const AnalysisOptions& opt) {
  opt.validate();
  series.validate();
  const Eigen::Index n_inc = series.values.size() - 1;

  Eigen::Index window = n_inc;
  if (opt.subperiod > 0.0) {
    window = Eigen::Index(std::llround(opt.subperiod / series.delta));
    if (window < 1) throw config_error("analysis: subperiod is shorter than one increment");
    if (window > n_inc) throw config_error("analysis: series is shorter than one subperiod");
  }
  if (window < opt.min_increments)
    throw config_error("analysis: subperiods hold " + std::to_string(window) +
                       " increments, fewer than the required " +
                       std::to_string(opt.min_increments));
  const Eigen::Index n_sub = n_inc / window;

  AnalysisReport report;
  report.delta = series.delta;
  report.p = opt.p;
  report.level = opt.level;
  report.mode = opt.mode;

  const double ks_crit = ks_limit_quantile(1.0 - opt.level);
  const double cvm_crit = CvmTable::instance().quantile(1.0 - opt.level);

  for (Eigen::Index k = 0; k < n_sub; ++k) {
    SubperiodResult sub;
    sub.index = int(k);
    sub.t_start = series.t0 + series.delta * double(k * window);
    sub.t_end = series.t0 + series.delta * double((k + 1) * window);

    SamplePath piece;  // local clock: each window is analysed on [0, L]
    piece.t0 = 0.0;
    piece.delta = series.delta;
    piece.values = series.values.segment(k * window, window + 1);
    sub.zero_increment_fraction = zero_increment_fraction(piece);

    try {
      if (opt.mode == InferenceMode::bss_plugin) {
        sub.nu_hat = cof_estimate_nu(piece, 1);
        sub.lambda_source = LambdaSource::nu_hat_plugin;
      }
      sub.lambda = lambda_for_inference(piece, 1, opt.p, opt.mode);
      sub.rel = relative_power_variation(piece, 1, opt.p);
      sub.band = confidence_band(piece, 1, opt.p, opt.level, sub.lambda);
      sub.ks = ks_statistic(piece, 1, opt.p, sub.lambda, sub.lambda_source);
      sub.cvm = cvm_statistic(piece, 1, opt.p, sub.lambda, sub.lambda_source);
      sub.ks_rejected = sub.ks.statistic > ks_crit;
      sub.cvm_rejected = sub.cvm.statistic > cvm_crit;
      ++report.analysed;
      report.frac_reject_ks += sub.ks_rejected ? 1.0 : 0.0;
      report.frac_reject_cvm += sub.cvm_rejected ? 1.0 : 0.0;
    } catch (const degenerate_input_error& e) {
      sub.skipped = true;
      sub.note = e.what();
      ++report.skipped;
    } catch (const regime_error& e) {
      sub.skipped = true;
      sub.note = e.what();
      ++report.skipped;
    }
    report.subperiods.push_back(std::move(sub));
  }
  if (report.analysed > 0) {
    report.frac_reject_ks /= report.analysed;
    report.frac_reject_cvm /= report.analysed;
  }
  return report;
}

std::string AnalysisReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "relvar-analysis/1";
  j["delta"] = delta;
  j["p"] = p;
  j["level"] = level;
  j["mode"] = mode == InferenceMode::bss_plugin ? "bss" : "sm";
  j["analysed"] = analysed;
  j["skipped"] = skipped;
  j["frac_reject_ks"] = frac_reject_ks;
  j["frac_reject_cvm"] = frac_reject_cvm;
  nlohmann::ordered_json subs = nlohmann::ordered_json::array();
  for (const auto& s : subperiods) {
    nlohmann::ordered_json e;
    e["index"] = s.index;
    e["t_start"] = s.t_start;
    e["t_end"] = s.t_end;
    e["skipped"] = s.skipped;
    if (!s.note.empty()) e["note"] = s.note;
    e["zero_increment_fraction"] = s.zero_increment_fraction;
    if (std::isfinite(s.nu_hat))
      e["nu_hat"] = s.nu_hat;
    else
      e["nu_hat"] = nullptr;
    if (!s.skipped) {
      e["lambda"] = s.lambda;
      e["lambda_source"] =
          s.lambda_source == LambdaSource::nu_hat_plugin ? "nu_hat_plugin" : "analytic";
      e["ks"] = {{"statistic", s.ks.statistic},
                 {"p_value", s.ks.p_value},
                 {"p_value_is_bound", s.ks.p_value_is_bound},
                 {"rejected", s.ks_rejected}};
      e["cvm"] = {{"statistic", s.cvm.statistic},
                  {"p_value", s.cvm.p_value},
                  {"p_value_is_bound", s.cvm.p_value_is_bound},
                  {"rejected", s.cvm_rejected}};
    }
    subs.push_back(std::move(e));
  }
  j["subperiods"] = std::move(subs);
  return j.dump(2) + "\n";
}

}  // namespace relvar
