#include "relvar/io.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace relvar {

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

double parse_double(const std::string& tok, const std::string& file, long line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || (end && *end != '\0'))
    throw input_error(file + ":" + std::to_string(line) + ": cannot parse value '" + tok + "'");
  if (!std::isfinite(v))
    throw input_error(file + ":" + std::to_string(line) + ": non-finite value");
  return v;
}

// "# key value" headers written by write_path_csv
std::optional<double> header_field(const std::string& line, const std::string& key) {
  std::istringstream is(line);
  std::string hash, word;
  if (!(is >> hash >> word) || hash != "#" || word != key) return std::nullopt;
  double v;
  if (!(is >> v)) return std::nullopt;
  return v;
}

}  // namespace

void IngestSpec::validate() const {
  if (path.empty()) throw config_error("ingest: input path required");
  if (format == Format::single_column && !(delta > 0.0))
    throw config_error("ingest: single-column input needs a positive sampling interval delta");
  if (subsample < 1) throw config_error("ingest: subsample factor must be >= 1");
  if (subperiod < 0.0 || !std::isfinite(subperiod))
    throw config_error("ingest: subperiod length must be >= 0");
}

SamplePath ingest_series(const IngestSpec& spec) {
  spec.validate();
  std::ifstream in(spec.path);
  if (!in) throw input_error("ingest: cannot open '" + spec.path + "'");

  std::vector<double> times, values;
  std::optional<double> header_t0, header_delta;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const std::size_t first = line.find_first_not_of(" \t");
    if (line[first] == '#') {
      if (auto v = header_field(line.substr(first), "t0")) header_t0 = *v;
      if (auto v = header_field(line.substr(first), "delta")) header_delta = *v;
      continue;
    }
    if (spec.format == IngestSpec::Format::single_column) {
      values.push_back(parse_double(line, spec.path, lineno));
    } else {
      const std::size_t comma = line.find(',');
      if (comma == std::string::npos)
        throw input_error(spec.path + ":" + std::to_string(lineno) +
                          ": expected 'time,value' row");
      times.push_back(parse_double(line.substr(0, comma), spec.path, lineno));
      values.push_back(parse_double(line.substr(comma + 1), spec.path, lineno));
    }
  }
  if (values.size() < 2)
    throw input_error("ingest: '" + spec.path + "' holds fewer than two observations");

  SamplePath path;
  if (spec.format == IngestSpec::Format::single_column) {
    path.t0 = 0.0;
    path.delta = spec.delta;
  } else if (header_t0 && header_delta) {
    path.t0 = *header_t0;
    path.delta = *header_delta;
    if (!(path.delta > 0.0)) throw input_error("ingest: header delta must be positive");
  } else {
    path.t0 = times.front();
    path.delta = (times.back() - times.front()) / double(times.size() - 1);
    if (!(path.delta > 0.0))
      throw input_error("ingest: time column of '" + spec.path + "' is not increasing");
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double expected = path.t0 + path.delta * double(j);
      if (std::abs(times[j] - expected) > 1e-6 * std::max(1.0, std::abs(expected)))
        throw input_error("ingest: time column of '" + spec.path +
                          "' is not uniformly spaced (row " + std::to_string(j + 1) + ")");
    }
  }

  if (spec.log_transform) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!(values[j] > 0.0))
        throw input_error("ingest: log transform needs strictly positive values (observation " +
                          std::to_string(j + 1) + " is " + fmt17(values[j]) + ")");
      values[j] = std::log(values[j]);
    }
  }

  if (spec.subsample > 1) {
    std::vector<double> kept;
    for (std::size_t j = 0; j < values.size(); j += std::size_t(spec.subsample))
      kept.push_back(values[j]);
    if (kept.size() < 2)
      throw input_error("ingest: subsample factor leaves fewer than two observations");
    values = std::move(kept);
    path.delta *= spec.subsample;
  }

  path.values = Eigen::Map<Eigen::ArrayXd>(values.data(), Eigen::Index(values.size()));
  path.meta = "ingest " + spec.path;
  path.validate();
  return path;
}

void write_path_csv(const std::string& file, const SamplePath& path,
                    const std::vector<std::string>& provenance) {
  path.validate();
  std::ofstream out(file);
  if (!out) throw input_error("cannot write '" + file + "'");
  out << "# relvar-path/1\n";
  for (const auto& line : provenance) out << "# " << line << "\n";
  out << "# t0 " << fmt17(path.t0) << "\n";
  out << "# delta " << fmt17(path.delta) << "\n";
  out << "# columns time,value\n";
  for (Eigen::Index j = 0; j < path.values.size(); ++j)
    out << fmt17(path.t0 + path.delta * double(j)) << "," << fmt17(path.values[j]) << "\n";
  if (!out) throw input_error("short write to '" + file + "'");
}

double zero_increment_fraction(const SamplePath& path) {
  const Eigen::Index n = path.values.size() - 1;
  if (n < 1) return 0.0;
  Eigen::Index zero = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (path.values[j + 1] == path.values[j]) ++zero;
  return double(zero) / double(n);
}

std::string read_text_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw input_error("cannot open '" + file + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw input_error("cannot write '" + file + "'");
  out << text;
  if (!out) throw input_error("short write to '" + file + "'");
}

}  // namespace relvar
